//! Primitive sequences derived from the quote/event stream: mid-price
//! jumps with sojourn times, queue-event chains on each side, spread
//! statistics, order-flow intensities, and inter-arrival fits.

use crate::error::{Error, Result};
use crate::ingest::{BookEvent, MidPoint, MidQuote, Side};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Ordered mid-price jumps with their sojourn times.
///
/// `jumps[k]` is the k-th nonzero mid change in price units, `sojourns[k]`
/// the time since the previous change (the first is measured from the first
/// observation), `change_times[k]` the time of the change itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceChangeSeq {
    pub jumps: Vec<f64>,
    pub sojourns: Vec<f64>,
    pub change_times: Vec<f64>,
}

impl PriceChangeSeq {
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }
}

/// Extract the jump/sojourn sequence from a mid series.
///
/// Quote updates that leave the mid unchanged produce no jump; updates at
/// identical timestamps are merged into one net change so sojourns stay
/// strictly positive.
pub fn extract_price_changes(mids: &[MidPoint], tick_size: f64) -> Result<PriceChangeSeq> {
    if mids.is_empty() {
        return Err(Error::InsufficientData("empty mid series".into()));
    }
    let half_tick = tick_size / 2.0;

    // Collapse equal timestamps to the last quote of the group.
    let mut collapsed: Vec<MidPoint> = Vec::with_capacity(mids.len());
    for &p in mids {
        match collapsed.last_mut() {
            Some(last) if last.time == p.time => *last = p,
            _ => collapsed.push(p),
        }
    }

    let mut jumps = Vec::new();
    let mut sojourns = Vec::new();
    let mut change_times = Vec::new();
    let mut level = collapsed[0].mid_half_ticks;
    let mut prev_event_time = collapsed[0].time;

    for p in &collapsed[1..] {
        if p.mid_half_ticks != level {
            jumps.push((p.mid_half_ticks - level) as f64 * half_tick);
            sojourns.push(p.time - prev_event_time);
            change_times.push(p.time);
            level = p.mid_half_ticks;
            prev_event_time = p.time;
        }
    }

    if jumps.is_empty() {
        return Err(Error::InsufficientData(
            "mid price never changes; need at least two distinct mids".into(),
        ));
    }
    Ok(PriceChangeSeq {
        jumps,
        sojourns,
        change_times,
    })
}

/// Which book events enter the queue-event classification.
#[derive(Debug, Clone, Copy, Default)]
pub struct EventFilter {
    /// Count hidden-order executions as queue depletions. Hidden volume
    /// does not sit in the visible level-1 queue, so the default is off.
    pub include_hidden: bool,
}

/// Queue-event chain of one side: +1 for a limit order joining the best
/// queue, -1 for a market order or cancellation removing from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueueEventChain {
    pub side: Side,
    pub values: Vec<i8>,
    /// P[V_{k+1} = 1 | V_k = 1]
    pub p11: f64,
    /// P[V_{k+1} = -1 | V_k = -1]
    pub p_minus1_minus1: f64,
}

/// Balance classification of the two queue-event chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Balance {
    Balanced,
    Unbalanced,
}

fn best_ticks(q: &MidQuote, side: Side) -> i64 {
    match side {
        Side::Bid => q.best_bid_ticks,
        Side::Ask => q.best_ask_ticks,
    }
}

/// An event touches the level-1 queue if its price equals that side's best
/// quote immediately before or after the event.
fn at_best(e: &BookEvent, before: Option<&MidQuote>, after: &MidQuote, side: Side) -> bool {
    e.price_ticks == best_ticks(after, side)
        || before.is_some_and(|q| e.price_ticks == best_ticks(q, side))
}

/// Sequence of +-1 queue events for one side, restricted to level 1.
/// Events and quotes must be aligned 1:1 as produced by the parser.
pub fn level1_event_values(
    events: &[BookEvent],
    quotes: &[MidQuote],
    side: Side,
    filter: &EventFilter,
) -> Vec<i8> {
    let mut values = Vec::new();
    for (i, e) in events.iter().enumerate() {
        if e.side != Some(side) {
            continue;
        }
        let Some(v) = e.kind.queue_value(filter.include_hidden) else {
            continue;
        };
        let before = if i > 0 { Some(&quotes[i - 1]) } else { None };
        if at_best(e, before, &quotes[i], side) {
            values.push(v);
        }
    }
    values
}

/// Estimate the queue-event chain of one side from observed transitions.
pub fn queue_event_chain(
    events: &[BookEvent],
    quotes: &[MidQuote],
    side: Side,
    filter: &EventFilter,
) -> Result<QueueEventChain> {
    if events.len() != quotes.len() {
        return Err(Error::StreamMisalignment {
            messages: events.len(),
            orderbook: quotes.len(),
        });
    }
    let values = level1_event_values(events, quotes, side, filter);
    chain_from_values(side, values)
}

fn chain_from_values(side: Side, values: Vec<i8>) -> Result<QueueEventChain> {
    let mut counts = [[0u64; 2]; 2]; // [from][to], index 0 = +1, 1 = -1
    for w in values.windows(2) {
        let from = usize::from(w[0] < 0);
        let to = usize::from(w[1] < 0);
        counts[from][to] += 1;
    }
    let from_plus = counts[0][0] + counts[0][1];
    let from_minus = counts[1][0] + counts[1][1];
    if from_plus == 0 || from_minus == 0 {
        return Err(Error::InsufficientData(format!(
            "side {side:?}: not enough queue-event transitions from both states"
        )));
    }
    Ok(QueueEventChain {
        side,
        values,
        p11: counts[0][0] as f64 / from_plus as f64,
        p_minus1_minus1: counts[1][1] as f64 / from_minus as f64,
    })
}

/// Balanced when |P(1,1) - P(-1,-1)| <= epsilon on both sides. Exact
/// equality never holds on finite data, hence the tolerance (default 0.05).
pub fn classify_balance(ask: &QueueEventChain, bid: &QueueEventChain, epsilon: f64) -> Balance {
    let ok = |c: &QueueEventChain| (c.p11 - c.p_minus1_minus1).abs() <= epsilon;
    if ok(ask) && ok(bid) {
        Balance::Balanced
    } else {
        Balance::Unbalanced
    }
}

/// Spread distribution and regime lifetimes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadStats {
    /// Fraction of quote observations at each spread (in ticks).
    pub fraction_at_ticks: BTreeMap<i64, f64>,
    /// Average spread in ticks.
    pub avg_spread_ticks: f64,
    /// Lifetimes (ms) of maximal intervals with spread of one tick.
    pub lifetimes_one_tick_ms: Vec<f64>,
    /// Lifetimes (ms) of maximal intervals with spread above one tick.
    pub lifetimes_above_one_tick_ms: Vec<f64>,
}

/// Per-observation spread fractions plus maximal constant-regime lifetimes.
/// Quote i holds until quote i+1; the final quote carries no duration, so
/// lifetimes partition `[t_first, t_last]` exactly.
pub fn spread_statistics(quotes: &[MidQuote]) -> Result<SpreadStats> {
    if quotes.is_empty() {
        return Err(Error::InsufficientData("no quotes".into()));
    }
    let n = quotes.len() as f64;
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut spread_sum = 0.0;
    for q in quotes {
        *counts.entry(q.spread_ticks()).or_insert(0) += 1;
        spread_sum += q.spread_ticks() as f64;
    }
    let fraction_at_ticks = counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect();

    let mut one_tick = Vec::new();
    let mut above = Vec::new();
    let mut i = 0usize;
    while i + 1 < quotes.len() {
        let wide = quotes[i].spread_ticks() > 1;
        let start = quotes[i].time;
        let mut j = i + 1;
        while j < quotes.len() && (quotes[j].spread_ticks() > 1) == wide {
            j += 1;
        }
        let end = if j < quotes.len() {
            quotes[j].time
        } else {
            quotes[quotes.len() - 1].time
        };
        let ms = (end - start) * 1e3;
        if wide {
            above.push(ms);
        } else {
            one_tick.push(ms);
        }
        i = j;
    }

    Ok(SpreadStats {
        fraction_at_ticks,
        avg_spread_ticks: spread_sum / n,
        lifetimes_one_tick_ms: one_tick,
        lifetimes_above_one_tick_ms: above,
    })
}

/// Order-flow intensities at the best quotes while the spread is one tick.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntensityEstimate {
    /// Limit-order arrival intensity, shares per second.
    pub lambda_hat: f64,
    /// Market-order plus cancellation intensity, shares per second.
    pub mu_plus_theta_hat: f64,
    /// Total time (seconds) the spread sat at one tick.
    pub spread_delta_time: f64,
}

/// Estimate lambda and mu + theta restricted to spread-delta periods.
///
/// An interval `[t_i, t_{i+1})` counts when quote i has a one-tick spread;
/// an event counts when the book it arrived into (the preceding quote) was
/// in such a period and the event touched a best queue.
pub fn estimate_intensities(
    events: &[BookEvent],
    quotes: &[MidQuote],
    filter: &EventFilter,
) -> Result<IntensityEstimate> {
    if events.len() != quotes.len() {
        return Err(Error::StreamMisalignment {
            messages: events.len(),
            orderbook: quotes.len(),
        });
    }
    let mut delta_time = 0.0;
    for w in quotes.windows(2) {
        if w[0].spread_ticks() == 1 {
            delta_time += w[1].time - w[0].time;
        }
    }
    if delta_time <= 0.0 {
        return Err(Error::UndefinedIntensity);
    }

    let mut limit_shares = 0.0f64;
    let mut remove_shares = 0.0f64;
    for i in 1..events.len() {
        let before = &quotes[i - 1];
        if before.spread_ticks() != 1 {
            continue;
        }
        let e = &events[i];
        let Some(side) = e.side else { continue };
        let Some(v) = e.kind.queue_value(filter.include_hidden) else {
            continue;
        };
        if !at_best(e, Some(before), &quotes[i], side) {
            continue;
        }
        if v > 0 {
            limit_shares += e.size as f64;
        } else {
            remove_shares += e.size as f64;
        }
    }

    Ok(IntensityEstimate {
        lambda_hat: limit_shares / delta_time,
        mu_plus_theta_hat: remove_shares / delta_time,
        spread_delta_time: delta_time,
    })
}

/// Empirical inter-arrival distribution against an exponential fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterarrivalFit {
    /// Sorted inter-arrival times with their empirical CDF values.
    pub grid: Vec<(f64, f64)>,
    /// Fitted exponential rate, 1 / mean inter-arrival.
    pub rate: f64,
    /// Kolmogorov-Smirnov distance between the empirical CDF and the fit.
    pub ks: f64,
}

/// Fit an exponential to the inter-arrival times of an event-time sequence
/// and report the KS distance.
pub fn interarrival_fit(times: &[f64]) -> Result<InterarrivalFit> {
    if times.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two events for inter-arrival times".into(),
        ));
    }
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.iter().any(|&g| g < 0.0) {
        return Err(Error::InvalidParameter(
            "event times must be non-decreasing".into(),
        ));
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if mean <= 0.0 {
        return Err(Error::DegenerateData(
            "all inter-arrival times are zero".into(),
        ));
    }
    let rate = 1.0 / mean;
    let ks = crate::math::ks_statistic(&mut gaps, |x| 1.0 - (-rate * x).exp());
    let n = gaps.len() as f64;
    let grid = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, (i + 1) as f64 / n))
        .collect();
    Ok(InterarrivalFit { grid, rate, ks })
}
