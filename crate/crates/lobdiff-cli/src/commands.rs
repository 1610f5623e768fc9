use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lobdiff::chain::{self, StateModel};
use lobdiff::contlarrad::{self, DepthBucketConfig};
use lobdiff::diffusion;
use lobdiff::events::{self, Balance, EventFilter};
use lobdiff::ingest::{self, BookEvent, EventKind, MidQuote, ParseOptions, SessionConfig, Side};
use lobdiff::simulate::{self, CltOptions, Scaling, SojournSpec};
use lobdiff::stats;
use serde::Serialize;
use serde_json::json;

use crate::args::{DataArgs, EstimateArgs, EventsArgs, ProbupArgs, ReportArgs, SimulateArgs};
use crate::config::{self, Overrides};
use crate::CliError;

fn open_reader(path: &str) -> Result<BufReader<fs::File>, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::Io(format!("cannot open {path}: {e}")))?;
    Ok(BufReader::new(f))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &str) -> Result<PathBuf, CliError> {
    let p = PathBuf::from(dir);
    fs::create_dir_all(&p)
        .map_err(|e| CliError::Io(format!("cannot create directory {dir}: {e}")))?;
    Ok(p)
}

fn load_overrides(config: &Option<String>) -> Result<Overrides, CliError> {
    match config {
        Some(path) => config::load(path),
        None => Ok(Overrides::new()),
    }
}

fn apply_data_overrides(ov: &Overrides, d: &mut DataArgs) -> Result<(), CliError> {
    config::set_opt(ov, "message", &mut d.message);
    config::set_opt(ov, "orderbook", &mut d.orderbook);
    config::set(ov, "tick_size", &mut d.tick_size)?;
    config::set(ov, "trim_minutes", &mut d.trim_minutes)?;
    config::set(ov, "session_open", &mut d.session_open)?;
    config::set(ov, "session_close", &mut d.session_close)?;
    config::set(ov, "include_hidden", &mut d.include_hidden)?;
    Ok(())
}

struct LoadedData {
    events: Vec<BookEvent>,
    quotes: Vec<MidQuote>,
    session: SessionConfig,
    filter: EventFilter,
}

/// Parse and trim a LOBSTER pair according to the data flags.
fn load_data(d: &DataArgs) -> Result<LoadedData, CliError> {
    let message = d
        .message
        .as_deref()
        .ok_or_else(|| CliError::Data("--message is required".into()))?;
    let orderbook = d
        .orderbook
        .as_deref()
        .ok_or_else(|| CliError::Data("--orderbook is required".into()))?;
    let session = SessionConfig {
        open: d.session_open,
        close: d.session_close,
        trim_head: d.trim_minutes * 60.0,
        trim_tail: d.trim_minutes * 60.0,
        tick_size: d.tick_size,
    };
    session.validate()?;
    let opts = ParseOptions {
        tick_size: d.tick_size,
        ..ParseOptions::default()
    };
    let (events, quotes) =
        ingest::parse_lobster(open_reader(message)?, open_reader(orderbook)?, &opts)?;
    let events = ingest::trim_session(&events, &session);
    let quotes = ingest::trim_session(&quotes, &session);
    Ok(LoadedData {
        events,
        quotes,
        session,
        filter: EventFilter {
            include_hidden: d.include_hidden,
        },
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const ROW_HEADER: &str = "symbol,n_states,balance,p_cont,p_cont_prime,a1,a2,a_star,sigma2,tau_star,m_tau,coeff_balanced,coeff_unbalanced,realized_std";

pub fn cmd_estimate(mut args: EstimateArgs) -> Result<(), CliError> {
    let ov = load_overrides(&args.config)?;
    apply_data_overrides(&ov, &mut args.data)?;
    config::set(&ov, "states", &mut args.states)?;
    config::set(&ov, "epsilon", &mut args.epsilon)?;
    config::set(&ov, "out_dir", &mut args.out_dir)?;
    config::set(&ov, "symbol", &mut args.symbol)?;
    config::set(&ov, "window", &mut args.window)?;

    let data = load_data(&args.data)?;
    let mids = ingest::midprice_series(&data.quotes)?;
    let pcs = events::extract_price_changes(&mids, data.session.tick_size)?;
    let (model, binning) = chain::fit_state_model(&pcs, args.states)?;
    let estimate = diffusion::estimate(&model, &pcs.sojourns)?;

    let balance = match (
        events::queue_event_chain(&data.events, &data.quotes, Side::Ask, &data.filter),
        events::queue_event_chain(&data.events, &data.quotes, Side::Bid, &data.filter),
    ) {
        (Ok(ask), Ok(bid)) => Some((events::classify_balance(&ask, &bid, args.epsilon), ask, bid)),
        _ => None,
    };
    let realized = stats::realized_std(&mids, args.window, data.session.tick_size).ok();

    let out = ensure_dir(&args.out_dir)?;
    let model_json = serde_json::to_string_pretty(&model)
        .map_err(|e| CliError::Data(format!("serialize model: {e}")))?;
    write_file(
        &out.join(format!("{}_model.json", args.symbol)),
        &model_json,
    )?;

    let balance_label = match &balance {
        Some((Balance::Balanced, _, _)) => "balanced",
        Some((Balance::Unbalanced, _, _)) => "unbalanced",
        None => "unknown",
    };
    let two_state = model.n == 2;
    let row = format!(
        "{}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        ROW_HEADER,
        args.symbol,
        model.n,
        balance_label,
        fmt_opt(two_state.then(|| model.p[0][0])),
        fmt_opt(two_state.then(|| model.p[1][1])),
        fmt_opt(two_state.then(|| model.a[0])),
        fmt_opt(two_state.then(|| model.a[1])),
        estimate.a_star,
        estimate.sigma2,
        estimate.tau_star,
        estimate.m_tau,
        estimate.coeff_balanced,
        estimate.coeff_unbalanced,
        fmt_opt(realized),
    );
    write_file(&out.join(format!("{}_row.csv", args.symbol)), &row)?;

    let report = json!({
        "config": {
            "message": args.data.message,
            "orderbook": args.data.orderbook,
            "tick_size": args.data.tick_size,
            "trim_minutes": args.data.trim_minutes,
            "session_open": args.data.session_open,
            "session_close": args.data.session_close,
            "include_hidden": args.data.include_hidden,
            "states": args.states,
            "epsilon": args.epsilon,
            "window": args.window,
            "symbol": args.symbol,
        },
        "n_price_changes": pcs.len(),
        "n_effective_states": binning.spec.n_effective,
        "balance": balance_label,
        "queue_chains": balance.as_ref().map(|(_, ask, bid)| json!({
            "ask": {"p11": ask.p11, "p_minus1_minus1": ask.p_minus1_minus1},
            "bid": {"p11": bid.p11, "p_minus1_minus1": bid.p_minus1_minus1},
        })),
        "estimate": estimate,
        "realized_std": realized,
    });
    write_file(
        &out.join(format!("{}_report.json", args.symbol)),
        &serde_json::to_string_pretty(&report).expect("json"),
    )?;

    println!(
        "{}: n={} sigma2={:.6e} tau*={:.4} m_tau={:.4} coeff {:.4}/{:.4} ({balance_label})",
        args.symbol,
        model.n,
        estimate.sigma2,
        estimate.tau_star,
        estimate.m_tau,
        estimate.coeff_balanced,
        estimate.coeff_unbalanced
    );
    Ok(())
}

pub fn cmd_events(mut args: EventsArgs) -> Result<(), CliError> {
    let ov = load_overrides(&args.config)?;
    apply_data_overrides(&ov, &mut args.data)?;
    config::set_opt(&ov, "export_dir", &mut args.export_dir);

    let data = load_data(&args.data)?;
    let mids = ingest::midprice_series(&data.quotes)?;
    let pcs = events::extract_price_changes(&mids, data.session.tick_size)?;
    let spread = events::spread_statistics(&data.quotes)?;
    let intensities = events::estimate_intensities(&data.events, &data.quotes, &data.filter).ok();

    let Some(dir) = args.export_dir.as_deref() else {
        println!(
            "{} events, {} quotes, {} price changes, avg spread {:.2} ticks",
            data.events.len(),
            data.quotes.len(),
            pcs.len(),
            spread.avg_spread_ticks
        );
        if let Some(i) = &intensities {
            println!(
                "lambda_hat = {:.4} shares/s, mu+theta_hat = {:.4} shares/s over {:.1} s",
                i.lambda_hat, i.mu_plus_theta_hat, i.spread_delta_time
            );
        }
        return Ok(());
    };
    let out = ensure_dir(dir)?;

    let mut pc_csv = String::from("change_time,sojourn,jump\n");
    for k in 0..pcs.len() {
        pc_csv.push_str(&format!(
            "{},{},{}\n",
            pcs.change_times[k], pcs.sojourns[k], pcs.jumps[k]
        ));
    }
    write_file(&out.join("price_changes.csv"), &pc_csv)?;

    let half_tick = data.session.tick_size / 2.0;
    let mut quotes_csv = String::from("time,bid,ask,mid\n");
    for q in &data.quotes {
        quotes_csv.push_str(&format!(
            "{},{},{},{}\n",
            q.time,
            q.best_bid_ticks as f64 * data.session.tick_size,
            q.best_ask_ticks as f64 * data.session.tick_size,
            q.mid_half_ticks() as f64 * half_tick,
        ));
    }
    write_file(&out.join("quotes.csv"), &quotes_csv)?;

    let mut frac_csv = String::from("spread_ticks,fraction\n");
    for (k, f) in &spread.fraction_at_ticks {
        frac_csv.push_str(&format!("{k},{f}\n"));
    }
    frac_csv.push_str(&format!("avg,{}\n", spread.avg_spread_ticks));
    write_file(&out.join("spread_fractions.csv"), &frac_csv)?;

    let mut life_csv = String::from("regime,duration_ms\n");
    for d in &spread.lifetimes_one_tick_ms {
        life_csv.push_str(&format!("one_tick,{d}\n"));
    }
    for d in &spread.lifetimes_above_one_tick_ms {
        life_csv.push_str(&format!("above_one_tick,{d}\n"));
    }
    write_file(&out.join("spread_lifetimes.csv"), &life_csv)?;

    let fit_for = |side: Side| {
        let times: Vec<f64> = data
            .events
            .iter()
            .filter(|e| e.side == Some(side))
            .map(|e| e.time)
            .collect();
        events::interarrival_fit(&times)
            .ok()
            .map(|f| json!({"rate": f.rate, "ks": f.ks, "n": f.grid.len()}))
    };
    let summary = json!({
        "n_events": data.events.len(),
        "n_quotes": data.quotes.len(),
        "n_price_changes": pcs.len(),
        "intensities": intensities,
        "interarrival_exponential_fit": {
            "bid": fit_for(Side::Bid),
            "ask": fit_for(Side::Ask),
        },
    });
    write_file(
        &out.join("intensities.json"),
        &serde_json::to_string_pretty(&summary).expect("json"),
    )?;
    println!("exported {} price changes to {dir}", pcs.len());
    Ok(())
}

fn parse_sojourn_spec(text: &str) -> Result<SojournSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .map_err(|_| CliError::Data(format!("bad sojourn parameter {s:?}")))
    };
    let spec = match parts.as_slice() {
        ["exp", r] => SojournSpec::Exponential { rate: num(r)? },
        ["det", v] => SojournSpec::Deterministic { value: num(v)? },
        ["pareto", a, s] => SojournSpec::Pareto {
            alpha: num(a)?,
            scale: num(s)?,
        },
        _ => {
            return Err(CliError::Data(format!(
                "cannot parse sojourn spec {text:?}; expected exp:RATE, det:VALUE, or pareto:ALPHA:SCALE"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_sojourns(text: &str, n: usize) -> Result<Vec<SojournSpec>, CliError> {
    let items: Vec<&str> = text.split(',').collect();
    if items.len() == 1 {
        return Ok(vec![parse_sojourn_spec(items[0])?; n]);
    }
    if items.len() != n {
        return Err(CliError::Data(format!(
            "got {} sojourn specs for {n} states",
            items.len()
        )));
    }
    items.iter().map(|s| parse_sojourn_spec(s)).collect()
}

/// Render one simulated path as a synthetic LOBSTER pair with a constant
/// one-tick spread. Jump values must be whole ticks.
fn emit_lobster_pair(
    model: &StateModel,
    path: &simulate::SimulatedPath,
    tick: f64,
    prefix: &str,
) -> Result<(), CliError> {
    let jump_ticks: Vec<i64> = model
        .a
        .iter()
        .map(|&a| {
            let t = a / tick;
            let r = t.round();
            if (t - r).abs() > 1e-9 {
                Err(CliError::Data(format!(
                    "jump value {a} is not a whole number of ticks; cannot emit a book"
                )))
            } else {
                Ok(r as i64)
            }
        })
        .collect::<Result<_, _>>()?;

    let mut bid: i64 = 10_000;
    let mut events = Vec::with_capacity(path.states.len());
    let mut quotes = Vec::with_capacity(path.states.len());
    for (k, (&state, &t)) in path.states.iter().zip(&path.times).enumerate() {
        bid += jump_ticks[state];
        let quote = MidQuote {
            time: t,
            best_bid_ticks: bid,
            best_ask_ticks: bid + 1,
            bid_depth: 100,
            ask_depth: 100,
        };
        events.push(BookEvent {
            time: t,
            kind: if k % 2 == 0 {
                EventKind::LimitSubmit
            } else {
                EventKind::ExecuteVisible
            },
            size: 100,
            price_ticks: bid,
            side: Some(Side::Bid),
        });
        quotes.push(quote);
    }
    let (msg, ob) = ingest::write_lobster(&events, &quotes, tick);
    write_file(Path::new(&format!("{prefix}_message.csv")), &msg)?;
    write_file(Path::new(&format!("{prefix}_orderbook.csv")), &ob)?;
    Ok(())
}

pub fn cmd_simulate(mut args: SimulateArgs) -> Result<(), CliError> {
    let ov = load_overrides(&args.config)?;
    config::set(&ov, "model", &mut args.model)?;
    config::set(&ov, "sojourn", &mut args.sojourn)?;
    config::set(&ov, "paths", &mut args.paths)?;
    config::set(&ov, "jumps", &mut args.jumps)?;
    config::set(&ov, "seed", &mut args.seed)?;
    config::set(&ov, "t", &mut args.t)?;
    config::set(&ov, "scaling", &mut args.scaling)?;
    config::set(&ov, "tick_size", &mut args.tick_size)?;
    config::set_opt(&ov, "out", &mut args.out);
    config::set_opt(&ov, "emit_lobster", &mut args.emit_lobster);

    let text = fs::read_to_string(&args.model)
        .map_err(|e| CliError::Io(format!("cannot read model {}: {e}", args.model)))?;
    let model: StateModel = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("model {}: {e}", args.model)))?;
    model.validate()?;
    let sojourns = parse_sojourns(&args.sojourn, model.n)?;
    let scaling = match args.scaling.as_str() {
        "auto" => None,
        "balanced" => Some(Scaling::Balanced),
        "unbalanced" => Some(Scaling::Unbalanced),
        other => {
            return Err(CliError::Data(format!(
                "scaling must be auto, balanced, or unbalanced, got {other:?}"
            )))
        }
    };

    if let Some(prefix) = &args.emit_lobster {
        let path = simulate::simulate_path(&model, &sojourns, args.jumps, args.seed)?;
        emit_lobster_pair(&model, &path, args.tick_size, prefix)?;
        println!(
            "wrote {prefix}_message.csv / {prefix}_orderbook.csv ({} jumps)",
            args.jumps
        );
    }

    let report = simulate::clt_check(
        &model,
        &sojourns,
        &CltOptions {
            n_paths: args.paths,
            n_jumps: args.jumps,
            t: args.t,
            seed: args.seed,
            scaling,
        },
    )?;
    let payload = json!({
        "config": {
            "model": args.model,
            "sojourn": args.sojourn,
            "paths": args.paths,
            "jumps": args.jumps,
            "seed": args.seed,
            "t": args.t,
            "scaling": args.scaling,
        },
        "report": report,
    });
    let text = serde_json::to_string_pretty(&payload).expect("json");
    match &args.out {
        Some(path) => write_file(Path::new(path), &text)?,
        None => println!("{text}"),
    }
    eprintln!(
        "predicted {:.6} empirical {:.6} relative error {:.3}% KS {:.4}",
        report.predicted_coeff,
        report.empirical_coeff,
        100.0 * report.relative_error,
        report.ks_normal
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SymbolRow {
    symbol: String,
    coeff_balanced: f64,
    coeff_unbalanced: f64,
    realized_std: f64,
}

fn read_rows(path: &str) -> Result<Vec<SymbolRow>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{path}: empty file")))?;
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| -> Result<usize, CliError> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::Data(format!("{path}: missing column {name}")))
    };
    let (i_sym, i_cb, i_cu, i_std) = (
        idx("symbol")?,
        idx("coeff_balanced")?,
        idx("coeff_unbalanced")?,
        idx("realized_std")?,
    );
    let mut out = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize, what: &str| -> Result<f64, CliError> {
            f.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Data(format!("{path} line {}: bad {what}", ln + 2)))
        };
        out.push(SymbolRow {
            symbol: f
                .get(i_sym)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("row{}", ln + 2)),
            coeff_balanced: num(i_cb, "coeff_balanced")?,
            coeff_unbalanced: num(i_cu, "coeff_unbalanced")?,
            realized_std: num(i_std, "realized_std")?,
        });
    }
    Ok(out)
}

pub fn cmd_report(mut args: ReportArgs) -> Result<(), CliError> {
    let ov = load_overrides(&args.config)?;
    config::set(&ov, "out_dir", &mut args.out_dir)?;

    let mut rows = Vec::new();
    for path in &args.rows {
        rows.extend(read_rows(path)?);
    }
    if rows.len() < 3 {
        return Err(CliError::Data(format!(
            "regression needs at least 3 symbol rows, got {}",
            rows.len()
        )));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.realized_std).collect();
    let yb: Vec<f64> = rows.iter().map(|r| r.coeff_balanced).collect();
    let yu: Vec<f64> = rows.iter().map(|r| r.coeff_unbalanced).collect();

    let summary = json!({
        "n_symbols": rows.len(),
        "balanced": {
            "with_intercept": stats::linear_fit_adjr2(&x, &yb)?,
            "through_origin": stats::linear_fit_through_origin(&x, &yb)?,
        },
        "unbalanced": {
            "with_intercept": stats::linear_fit_adjr2(&x, &yu)?,
            "through_origin": stats::linear_fit_through_origin(&x, &yu)?,
        },
    });

    let out = ensure_dir(&args.out_dir)?;
    write_file(
        &out.join("regression_summary.json"),
        &serde_json::to_string_pretty(&summary).expect("json"),
    )?;

    let mut scatter = String::from("symbol,realized_std,coeff_balanced,coeff_unbalanced\n");
    for r in &rows {
        scatter.push_str(&format!(
            "{},{},{},{}\n",
            r.symbol, r.realized_std, r.coeff_balanced, r.coeff_unbalanced
        ));
    }
    write_file(&out.join("scatter.csv"), &scatter)?;

    let adj = |k: &str, fit: &str| summary[k][fit]["adj_r2"].as_f64().unwrap_or(f64::NAN);
    println!(
        "{} symbols: adj R^2 balanced {:.4} (origin {:.4}), unbalanced {:.4} (origin {:.4})",
        rows.len(),
        adj("balanced", "with_intercept"),
        adj("balanced", "through_origin"),
        adj("unbalanced", "with_intercept"),
        adj("unbalanced", "through_origin"),
    );
    Ok(())
}

pub fn cmd_probup(mut args: ProbupArgs) -> Result<(), CliError> {
    let ov = load_overrides(&args.config)?;
    config::set(&ov, "max_n", &mut args.max_n)?;
    config::set(&ov, "max_p", &mut args.max_p)?;
    config::set(&ov, "lot_size", &mut args.lot_size)?;
    config::set(&ov, "include_wide_spreads", &mut args.include_wide_spreads)?;
    config::set_opt(&ov, "out", &mut args.out);
    apply_data_overrides(&ov, &mut args.data)?;

    let grid = contlarrad::model_grid(args.max_n, args.max_p)?;

    let empirical = if args.data.message.is_some() && args.data.orderbook.is_some() {
        let data = load_data(&args.data)?;
        let mids = ingest::midprice_series(&data.quotes)?;
        let pcs = events::extract_price_changes(&mids, data.session.tick_size)?;
        let cfg = DepthBucketConfig {
            lot_size: args.lot_size,
            max_units: args.max_n.max(args.max_p) as usize,
        };
        Some(contlarrad::empirical_up_frequency(
            &data.quotes,
            &pcs,
            &cfg,
            !args.include_wide_spreads,
        )?)
    } else {
        None
    };

    let mut csv = String::from("n,p,model_prob,emp_up,emp_total\n");
    for n in 1..=args.max_n {
        for p in 1..=args.max_p {
            let model_prob = grid.values[(n - 1) as usize][(p - 1) as usize];
            let (up, total) = empirical
                .as_ref()
                .map(|g| {
                    let (b, a) = (n as usize, p as usize);
                    (g.up[b][a], g.total[b][a])
                })
                .unwrap_or((0, 0));
            if total > 0 {
                csv.push_str(&format!("{n},{p},{model_prob},{up},{total}\n"));
            } else {
                csv.push_str(&format!("{n},{p},{model_prob},,\n"));
            }
        }
    }
    match &args.out {
        Some(path) => {
            write_file(Path::new(path), &csv)?;
            println!("wrote {path}");
        }
        None => print!("{csv}"),
    }
    Ok(())
}
