//! `bound` and `eval` subcommands.

use ruin_core::oracle::{estimate, Quantity};
use ruin_core::{BoundReport, GridFunction, GridSpec};

use crate::config::ModelConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Dk1,
    Dk2,
    Dk3,
}

pub fn bound(kind: BoundKind, cfg: &ModelConfig, gamma: Option<f64>, y: Option<f64>) -> CliResult<BoundReport> {
    let q = cfg.quadrature()?;
    Ok(match kind {
        BoundKind::Dk1 => ruin_core::dk1(&cfg.risk_model()?, &cfg.second_model()?, gamma.unwrap_or(0.0), &q)?,
        BoundKind::Dk2 => {
            let y = y.ok_or_else(|| CliError::Usage("dk2 needs --y".into()))?;
            ruin_core::dk2(&cfg.risk_model()?, &cfg.second_model()?, y, &q)?
        }
        BoundKind::Dk3 => ruin_core::dk3(&cfg.perturbed()?, &cfg.second_perturbed()?, &q)?,
    })
}

/// Header and one record: name, value, prefactor, modulus, components.
pub fn bound_csv(r: &BoundReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bound".to_string(), "value".into(), "prefactor".into(), "contraction_modulus".into()];
    header.extend(r.components.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    let mut rec = vec![r.name.to_string(), fmt(r.value), fmt(r.prefactor), fmt(r.contraction_modulus)];
    rec.extend(r.components.iter().map(|(_, v)| fmt(*v)));
    w.write_record(&rec)?;
    finish(w)
}

fn fmt(v: f64) -> String {
    format!("{v:.7}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    Ruin,
    Deficit,
    KTail,
    PsiTotal,
    Iterate,
    MonteCarlo,
}

#[derive(Debug, Clone, Default)]
pub struct EvalArgs {
    pub u: Vec<f64>,
    pub y: Option<f64>,
    pub k0: Option<f64>,
    pub n: Option<usize>,
    pub quantity: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
}

/// Parses `0,1,2` or `start:end:step` (inclusive).
pub fn parse_points(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse points `{s}` (use `a,b,c` or `start:end:step`)"));
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = s.split(':').collect();
    let points = match parts.as_slice() {
        [a, b, h] => {
            let (a, b, h) = (num(a)?, num(b)?, num(h)?);
            if !(h > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * h).collect()
        }
        [_] => s.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if points.iter().any(|u| *u < 0.0) {
        return Err(CliError::Usage("points must be >= 0".into()));
    }
    Ok(points)
}

fn grid(cfg: &ModelConfig, args: &EvalArgs) -> GridSpec {
    GridSpec::new(args.step.or(cfg.numeric.h).unwrap_or(GridSpec::default().step), cfg.numeric.umax)
}

pub fn eval(kind: EvalKind, cfg: &ModelConfig, args: &EvalArgs) -> CliResult<String> {
    if args.u.is_empty() {
        return Err(CliError::Usage("eval needs --u".into()));
    }
    let g = grid(cfg, args);
    let curve = |f: GridFunction| args.u.iter().map(|&u| (u, f.at(u), None)).collect::<Vec<_>>();
    let rows: Vec<(f64, f64, Option<f64>)> = match kind {
        EvalKind::Ruin => curve(cfg.risk_model()?.ruin_probability(&g)?),
        EvalKind::Deficit => {
            let y = args.y.ok_or_else(|| CliError::Usage("deficit needs --y".into()))?;
            curve(cfg.risk_model()?.deficit_tail(y, &g)?)
        }
        EvalKind::KTail => curve(cfg.perturbed()?.k_tail(&g)?),
        EvalKind::PsiTotal => curve(cfg.perturbed()?.psi_total(&g)?),
        EvalKind::Iterate => {
            let pm = cfg.perturbed()?;
            let k0 = args.k0.ok_or_else(|| CliError::Usage("iterate needs --k0".into()))?;
            let n = args.n.ok_or_else(|| CliError::Usage("iterate needs --n".into()))?;
            match pm.k_iterate_erlang(k0, n, 0.0) {
                Ok(_) => args.u.iter().map(|&u| Ok((u, pm.k_iterate_erlang(k0, n, u)?, None))).collect::<CliResult<_>>()?,
                Err(ruin_core::Error::Hypothesis { .. }) => {
                    let u_end = args.u.iter().cloned().fold(0.0, f64::max);
                    let g = GridSpec::new(g.step, Some(pm.u_max(&g)?.max(u_end)));
                    let trace = pm.k_iterates(k0, n, &g)?;
                    curve(trace.last().clone())
                }
                Err(e) => return Err(e.into()),
            }
        }
        EvalKind::MonteCarlo => {
            let quantity = match args.quantity.as_deref().unwrap_or("psi") {
                "psi" => Quantity::Psi,
                "psit" => Quantity::PsiTotal,
                "ktail" => Quantity::KTail,
                "deficit" => Quantity::Deficit {
                    y: args.y.ok_or_else(|| CliError::Usage("deficit needs --y".into()))?,
                },
                other => return Err(CliError::Usage(format!("unknown quantity `{other}` (psi, psit, ktail, deficit)"))),
            };
            let n = args.samples.unwrap_or(1_000_000);
            let seed = args.seed.or(cfg.numeric.seed).unwrap_or(42);
            let perturbed = matches!(quantity, Quantity::PsiTotal | Quantity::KTail);
            let mut out = Vec::new();
            for &u in &args.u {
                let e = if perturbed {
                    estimate(&cfg.perturbed()?, quantity, u, n, seed)?
                } else {
                    estimate(&cfg.risk_model()?, quantity, u, n, seed)?
                };
                out.push((u, e.estimate, Some(e.standard_error)));
            }
            out
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    if kind == EvalKind::MonteCarlo {
        w.write_record(["u", "value", "se"])?;
    } else {
        w.write_record(["u", "value"])?;
    }
    for (u, v, se) in rows {
        let mut rec = vec![u.to_string(), fmt(v)];
        if let Some(se) = se {
            rec.push(fmt(se));
        }
        w.write_record(&rec)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points() {
        assert_eq!(parse_points("0,1,2.5").unwrap(), vec![0.0, 1.0, 2.5]);
        assert_eq!(parse_points("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_points("0:1").is_err());
        assert!(parse_points("-1").is_err());
        assert!(parse_points("x").is_err());
    }
}
