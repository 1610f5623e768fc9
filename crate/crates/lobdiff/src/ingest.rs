//! Level-1 LOBSTER ingestion: message/orderbook CSV parsing, session
//! trimming, and the mid-price series.
//!
//! Prices are held as integer ticks throughout (mids as half-ticks) so that
//! no float drift enters the jump extraction. The tick size is
//! configuration, defaulting to $0.01; LOBSTER prices arrive in units of
//! $0.0001 and must convert to a whole number of ticks.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::BufRead;

/// Book side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Bid,
    Ask,
}

/// Message type of one order-book event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    LimitSubmit,
    Cancel,
    Delete,
    ExecuteVisible,
    ExecuteHidden,
    Other,
}

impl EventKind {
    fn from_lobster(code: i64) -> EventKind {
        match code {
            1 => EventKind::LimitSubmit,
            2 => EventKind::Cancel,
            3 => EventKind::Delete,
            4 => EventKind::ExecuteVisible,
            5 => EventKind::ExecuteHidden,
            _ => EventKind::Other,
        }
    }

    /// Queue-event value per the model: limit orders grow the queue,
    /// market orders and cancellations shrink it. `None` for kinds the
    /// model does not classify.
    pub fn queue_value(self, include_hidden: bool) -> Option<i8> {
        match self {
            EventKind::LimitSubmit => Some(1),
            EventKind::Cancel | EventKind::Delete | EventKind::ExecuteVisible => Some(-1),
            EventKind::ExecuteHidden => include_hidden.then_some(-1),
            EventKind::Other => None,
        }
    }
}

/// One order-book message.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BookEvent {
    /// Seconds after midnight.
    pub time: f64,
    pub kind: EventKind,
    /// Shares.
    pub size: u32,
    /// Integer ticks.
    pub price_ticks: i64,
    /// `None` only for `Other` rows (e.g. trading halts carry no side).
    pub side: Option<Side>,
}

/// Level-1 book state after the aligned message.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MidQuote {
    pub time: f64,
    pub best_bid_ticks: i64,
    pub best_ask_ticks: i64,
    pub bid_depth: u32,
    pub ask_depth: u32,
}

impl MidQuote {
    /// Spread in ticks.
    pub fn spread_ticks(&self) -> i64 {
        self.best_ask_ticks - self.best_bid_ticks
    }

    /// Mid price in half-ticks (exact).
    pub fn mid_half_ticks(&self) -> i64 {
        self.best_bid_ticks + self.best_ask_ticks
    }
}

/// One point of a mid-price series; the price is in half-ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidPoint {
    pub time: f64,
    pub mid_half_ticks: i64,
}

/// Trading session bounds and edge trimming.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Session open, seconds after midnight.
    pub open: f64,
    /// Session close, seconds after midnight.
    pub close: f64,
    /// Seconds dropped after the open (default 900 = 15 minutes).
    pub trim_head: f64,
    /// Seconds dropped before the close (default 900).
    pub trim_tail: f64,
    /// Price units per tick (default $0.01).
    pub tick_size: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        // NASDAQ regular session, 09:30 to 16:00.
        SessionConfig {
            open: 34_200.0,
            close: 57_600.0,
            trim_head: 900.0,
            trim_tail: 900.0,
            tick_size: 0.01,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.open,
            self.close,
            self.trim_head,
            self.trim_tail,
            self.tick_size,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSession("fields must be finite".into()));
        }
        if self.close <= self.open {
            return Err(Error::InvalidSession(format!(
                "close {} must exceed open {}",
                self.close, self.open
            )));
        }
        if self.trim_head < 0.0 || self.trim_tail < 0.0 {
            return Err(Error::InvalidSession("trims must be non-negative".into()));
        }
        if self.trim_head + self.trim_tail >= self.close - self.open {
            return Err(Error::InvalidSession(
                "trims exceed the session length".into(),
            ));
        }
        if self.tick_size <= 0.0 {
            return Err(Error::InvalidSession("tick size must be positive".into()));
        }
        Ok(())
    }
}

/// Parser configuration.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Price units per tick.
    pub tick_size: f64,
    /// Allowed backwards time jitter in seconds before it counts as an
    /// ordering violation. Exchange feeds jitter at nanosecond scale.
    pub time_tolerance: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            tick_size: 0.01,
            time_tolerance: 1e-9,
        }
    }
}

/// Anything carrying an event timestamp; lets `trim_session` work on
/// events, quotes, and derived series alike.
pub trait Timestamped {
    fn time(&self) -> f64;
}

impl Timestamped for BookEvent {
    fn time(&self) -> f64 {
        self.time
    }
}
impl Timestamped for MidQuote {
    fn time(&self) -> f64 {
        self.time
    }
}
impl Timestamped for MidPoint {
    fn time(&self) -> f64 {
        self.time
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, row: usize, what: &str) -> Result<T> {
    field.trim().parse::<T>().map_err(|_| Error::MalformedRow {
        row,
        detail: format!("cannot parse {what} from {field:?}"),
    })
}

/// LOBSTER prices are integers in units of 1e-4 dollars. Convert to ticks,
/// requiring exact divisibility.
fn price_to_ticks(price_e4: i64, ticks_e4: i64, row: usize) -> Result<i64> {
    if price_e4 <= 0 {
        return Err(Error::MalformedRow {
            row,
            detail: format!("price {price_e4} is not positive"),
        });
    }
    if price_e4 % ticks_e4 != 0 {
        return Err(Error::MalformedRow {
            row,
            detail: format!("price {price_e4} is not a whole number of ticks ({ticks_e4} x 1e-4)"),
        });
    }
    Ok(price_e4 / ticks_e4)
}

/// Parse an aligned LOBSTER message/orderbook pair.
///
/// Message rows are `time,type,order_id,size,price,direction`; level-1
/// orderbook rows are `ask_price,ask_size,bid_price,bid_size`, one row per
/// message row and in the same order. Returned events and quotes keep the
/// original order; row numbers in errors are 1-based.
pub fn parse_lobster<M: BufRead, B: BufRead>(
    messages: M,
    orderbook: B,
    opts: &ParseOptions,
) -> Result<(Vec<BookEvent>, Vec<MidQuote>)> {
    let ticks_e4_f = opts.tick_size * 1e4;
    let ticks_e4 = ticks_e4_f.round() as i64;
    if ticks_e4 < 1 || (ticks_e4_f - ticks_e4 as f64).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "tick size {} is not a multiple of 1e-4 dollars",
            opts.tick_size
        )));
    }

    let mut events = Vec::new();
    let mut quotes = Vec::new();
    let mut msg_lines = messages.lines();
    let mut ob_lines = orderbook.lines();
    let mut prev_time = f64::NEG_INFINITY;
    let mut row = 0usize;

    loop {
        row += 1;
        let msg = msg_lines
            .next()
            .transpose()
            .map_err(|e| Error::MalformedRow {
                row,
                detail: format!("read failure: {e}"),
            })?;
        let ob = ob_lines
            .next()
            .transpose()
            .map_err(|e| Error::MalformedRow {
                row,
                detail: format!("read failure: {e}"),
            })?;
        let (msg, ob) = match (msg, ob) {
            (Some(m), Some(o)) => (m, o),
            (None, None) => break,
            (m, o) => {
                let parsed = row - 1;
                let (messages, orderbook) = match (m, o) {
                    (Some(_), None) => (parsed + 1 + msg_lines.count(), parsed),
                    _ => (parsed, parsed + 1 + ob_lines.count()),
                };
                return Err(Error::StreamMisalignment {
                    messages,
                    orderbook,
                });
            }
        };
        if msg.trim().is_empty() && ob.trim().is_empty() {
            // Tolerate a trailing blank line in both files.
            row -= 1;
            continue;
        }

        let mf: Vec<&str> = msg.split(',').collect();
        if mf.len() < 6 {
            return Err(Error::MalformedRow {
                row,
                detail: format!("expected 6 message fields, got {}", mf.len()),
            });
        }
        let time: f64 = parse_field(mf[0], row, "time")?;
        let type_code: i64 = parse_field(mf[1], row, "type")?;
        let _order_id: i64 = parse_field(mf[2], row, "order id")?;
        let size: i64 = parse_field(mf[3], row, "size")?;
        let price_e4: i64 = parse_field(mf[4], row, "price")?;
        let direction: i64 = parse_field(mf[5], row, "direction")?;

        if time < prev_time - opts.time_tolerance {
            return Err(Error::OrderViolation {
                row,
                prev: prev_time,
                time,
            });
        }
        prev_time = prev_time.max(time);

        let kind = EventKind::from_lobster(type_code);
        let side = match direction {
            1 => Some(Side::Bid),
            -1 => Some(Side::Ask),
            _ if kind == EventKind::Other => None,
            _ => {
                return Err(Error::MalformedRow {
                    row,
                    detail: format!("direction must be 1 or -1, got {direction}"),
                })
            }
        };
        if size < 1 && kind != EventKind::Other {
            return Err(Error::MalformedRow {
                row,
                detail: format!("size must be positive, got {size}"),
            });
        }
        // `Other` rows (halts etc.) carry sentinel prices; skip conversion.
        let price_ticks = if kind == EventKind::Other {
            0
        } else {
            price_to_ticks(price_e4, ticks_e4, row)?
        };
        events.push(BookEvent {
            time,
            kind,
            size: size.max(0) as u32,
            price_ticks,
            side,
        });

        let of: Vec<&str> = ob.split(',').collect();
        if of.len() < 4 {
            return Err(Error::MalformedRow {
                row,
                detail: format!("expected 4 orderbook fields, got {}", of.len()),
            });
        }
        let ask_e4: i64 = parse_field(of[0], row, "ask price")?;
        let ask_depth: i64 = parse_field(of[1], row, "ask size")?;
        let bid_e4: i64 = parse_field(of[2], row, "bid price")?;
        let bid_depth: i64 = parse_field(of[3], row, "bid size")?;
        if ask_depth < 0 || bid_depth < 0 {
            return Err(Error::MalformedRow {
                row,
                detail: "orderbook sizes must be non-negative".into(),
            });
        }
        quotes.push(MidQuote {
            time,
            best_bid_ticks: price_to_ticks(bid_e4, ticks_e4, row)?,
            best_ask_ticks: price_to_ticks(ask_e4, ticks_e4, row)?,
            bid_depth: bid_depth as u32,
            ask_depth: ask_depth as u32,
        });
    }

    Ok((events, quotes))
}

/// Keep items with time in `[open + trim_head, close - trim_tail]`,
/// boundaries inclusive. Idempotent.
pub fn trim_session<T: Timestamped + Clone>(items: &[T], cfg: &SessionConfig) -> Vec<T> {
    let lo = cfg.open + cfg.trim_head;
    let hi = cfg.close - cfg.trim_tail;
    items
        .iter()
        .filter(|it| {
            let t = it.time();
            t >= lo && t <= hi
        })
        .cloned()
        .collect()
}

/// Mid-price series in half-ticks, one point per quote. Consecutive equal
/// mids are retained; deduplication happens in jump extraction.
pub fn midprice_series(quotes: &[MidQuote]) -> Result<Vec<MidPoint>> {
    let mut out = Vec::with_capacity(quotes.len());
    for (i, q) in quotes.iter().enumerate() {
        if q.best_ask_ticks < q.best_bid_ticks {
            return Err(Error::CrossedBook {
                index: i,
                bid: q.best_bid_ticks,
                ask: q.best_ask_ticks,
            });
        }
        out.push(MidPoint {
            time: q.time,
            mid_half_ticks: q.mid_half_ticks(),
        });
    }
    Ok(out)
}

/// Render events and quotes back to LOBSTER CSV text (message, orderbook).
/// Inverse of `parse_lobster` up to numeric normalization.
pub fn write_lobster(
    events: &[BookEvent],
    quotes: &[MidQuote],
    tick_size: f64,
) -> (String, String) {
    let ticks_e4 = (tick_size * 1e4).round() as i64;
    let mut msg = String::new();
    let mut ob = String::new();
    for (e, q) in events.iter().zip(quotes) {
        let type_code = match e.kind {
            EventKind::LimitSubmit => 1,
            EventKind::Cancel => 2,
            EventKind::Delete => 3,
            EventKind::ExecuteVisible => 4,
            EventKind::ExecuteHidden => 5,
            EventKind::Other => 7,
        };
        let dir = match e.side {
            Some(Side::Bid) => 1,
            Some(Side::Ask) => -1,
            None => 0,
        };
        msg.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_time(e.time),
            type_code,
            0,
            e.size,
            e.price_ticks * ticks_e4,
            dir
        ));
        ob.push_str(&format!(
            "{},{},{},{}\n",
            q.best_ask_ticks * ticks_e4,
            q.ask_depth,
            q.best_bid_ticks * ticks_e4,
            q.bid_depth
        ));
    }
    (msg, ob)
}

fn fmt_time(t: f64) -> String {
    // LOBSTER carries nanosecond decimals; print enough digits to round-trip.
    format!("{t:.9}")
}
