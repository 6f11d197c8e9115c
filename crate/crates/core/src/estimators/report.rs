//! CSV reports. Each starts with `# estimator=<name> ...` holding the
//! parameters and sample counts, then any caller-supplied comment lines.

use std::io::{self, Write};

use super::{binomial_sigma, AbsReturnAcf, AlphaEstimate, ConditionalParity, DeltaSDistribution, RelaxationCurve};

fn preamble<W: Write>(w: &mut W, head: &str, comments: &[String]) -> io::Result<()> {
    writeln!(w, "# estimator={head}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

pub fn write_odd_fraction_csv<W: Write>(
    fraction: f64,
    events: usize,
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    preamble(&mut w, &format!("odd_fraction events={events}"), comments)?;
    writeln!(w, "odd_fraction,events")?;
    writeln!(w, "{fraction:.6},{events}")
}

pub fn write_conditional_parity_csv<W: Write>(
    cp: &ConditionalParity,
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    let head = format!(
        "conditional_parity min_count={} events={} cells={}",
        cp.min_count,
        cp.total(),
        cp.cells.len()
    );
    preamble(&mut w, &head, comments)?;
    writeln!(w, "s,n,freq_odd,freq_even,sigma,low_statistics")?;
    for c in cp.cells.values() {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.6},{}",
            c.s,
            c.n,
            c.freq_odd(),
            c.freq_even(),
            binomial_sigma(c.freq_odd(), c.n),
            c.low_statistics
        )?;
    }
    Ok(())
}

pub fn write_delta_s_csv<W: Write>(
    dists: &[DeltaSDistribution],
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    let spreads: Vec<String> = dists.iter().map(|d| d.s.to_string()).collect();
    let total: u64 = dists.iter().map(|d| d.n).sum();
    let head = format!("delta_s_distribution spreads={} events={total}", spreads.join(";"));
    preamble(&mut w, &head, comments)?;
    writeln!(w, "s,delta_s,count,freq")?;
    for d in dists {
        for delta in 1..d.s {
            let count = d.counts.get(&delta).copied().unwrap_or(0);
            writeln!(w, "{},{},{},{:.6}", d.s, delta, count, d.freq(delta))?;
        }
    }
    Ok(())
}

/// One row per spread plus a final `all` row with the pooled estimate.
pub fn write_alpha_csv<W: Write>(est: &AlphaEstimate, comments: &[String], mut w: W) -> io::Result<()> {
    let head = format!("alpha_estimate events={} pooled={:.6}", est.total(), est.pooled());
    preamble(&mut w, &head, comments)?;
    writeln!(w, "s,n,alpha,sigma")?;
    for c in est.cells.values() {
        writeln!(w, "{},{},{:.6},{:.6}", c.s, c.n, c.alpha(), binomial_sigma(c.alpha(), c.n))?;
    }
    let p = est.pooled();
    writeln!(w, "all,{},{:.6},{:.6}", est.total(), p, binomial_sigma(p, est.total()))
}

pub fn write_acf_csv<W: Write>(acf: &AbsReturnAcf, comments: &[String], mut w: W) -> io::Result<()> {
    let fit = match acf.fit {
        Some(f) => format!(
            "correlation_time={:.6} amplitude={:.6} fit_lags={}",
            f.correlation_time, f.amplitude, f.lags_used
        ),
        None => "correlation_time=none".to_string(),
    };
    let head = format!(
        "acf_abs_returns returns={} max_lag={} fit_window={}..{} {fit}",
        acf.n_returns,
        acf.acf.len(),
        acf.window.first,
        acf.window.last
    );
    preamble(&mut w, &head, comments)?;
    writeln!(w, "lag,acf")?;
    for (i, r) in acf.acf.iter().enumerate() {
        writeln!(w, "{},{:.6}", i + 1, r)?;
    }
    Ok(())
}

/// Lags without data are written with an empty `g`.
pub fn write_relaxation_csv<W: Write>(
    curve: &RelaxationCurve,
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    let head = format!(
        "spread_relaxation delta={} max_lag={} conditioning_events={} mean_spread={:.6}",
        curve.delta,
        curve.max_lag(),
        curve.events(),
        curve.mean_spread
    );
    preamble(&mut w, &head, comments)?;
    writeln!(w, "tau,g,count")?;
    for (tau, (v, c)) in curve.values.iter().zip(&curve.counts).enumerate() {
        match v {
            Some(g) => writeln!(w, "{tau},{g:.6},{c}")?,
            None => writeln!(w, "{tau},,{c}")?,
        }
    }
    Ok(())
}
