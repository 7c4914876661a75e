use anyhow::Result;
use clap::ValueEnum;
use slconvex_core::convexity::{e_matrix_check, invariant_grid, lambda_grid};
use slconvex_core::grid;
use slconvex_core::isochoric::{ratio_grid, IsochoricEnergy};
use slconvex_core::{AnalysisConfig, EnergySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// gamma,phi over the shear grid.
    Phi,
    /// I,psi over I = 2 + gamma^2.
    Psi,
    /// t,h of the isochoric lift over the ratio grid.
    H,
    /// gamma,phi,slope,second_difference; slope on [gamma_k, gamma_k+1],
    /// second difference centred at gamma_k.
    SlackDfz,
    /// I,psi_prime,combination,slack with combination = psi' + 2(I-2)psi''.
    SlackAbeyaratne,
    /// lambda,e11,e22,e12,det,slack over the E-matrix sweep.
    SlackEMatrix,
    /// t,h,second_difference over the ratio grid.
    SlackH,
}

type Row = Vec<Option<f64>>;

fn table(header: &[&str], rows: Vec<Row>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.map_or(String::new(), |x| x.to_string())))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Values and forward slopes and centred second differences of `fs`.
fn with_differences(xs: &[f64], fs: &[f64]) -> Vec<Row> {
    let slopes = grid::slopes(xs, fs);
    let second = grid::second_differences(xs, fs);
    (0..xs.len())
        .map(|k| {
            let c = k.checked_sub(1).and_then(|j| second.get(j).copied());
            vec![Some(xs[k]), Some(fs[k]), slopes.get(k).copied(), c]
        })
        .collect()
}

pub fn render(spec: &EnergySpec, curve: Curve, cfg: &AnalysisConfig) -> Result<String> {
    let gammas = grid::uniform(0.0, cfg.gamma_max, cfg.gamma_points);
    match curve {
        Curve::Phi => {
            let phi = spec.to_shear_phi();
            let fs = grid::sample(&gammas, |g| phi.eval(g))?;
            table(
                &["gamma", "phi"],
                gammas.iter().zip(fs).map(|(&g, f)| vec![Some(g), Some(f)]).collect(),
            )
        }
        Curve::Psi => {
            let psi = spec.to_psi();
            let is: Vec<f64> = gammas.iter().map(|g| 2.0 + g * g).collect();
            let fs = grid::sample(&is, |i| psi.eval(i))?;
            table(
                &["I", "psi"],
                is.iter().zip(fs).map(|(&i, f)| vec![Some(i), Some(f)]).collect(),
            )
        }
        Curve::H => {
            let h = IsochoricEnergy::from_spec(spec)?.h();
            let ts = ratio_grid(cfg);
            let fs = grid::sample(&ts, |t| h.eval(t))?;
            table(
                &["t", "h"],
                ts.iter().zip(fs).map(|(&t, f)| vec![Some(t), Some(f)]).collect(),
            )
        }
        Curve::SlackDfz => {
            let phi = spec.to_shear_phi();
            let fs = grid::sample(&gammas, |g| phi.eval(g))?;
            table(
                &["gamma", "phi", "slope", "second_difference"],
                with_differences(&gammas, &fs),
            )
        }
        Curve::SlackAbeyaratne => {
            let psi = spec.to_psi();
            let mut rows = Vec::new();
            for i in invariant_grid(cfg) {
                let (d1, d2) = (psi.d1(i)?, psi.d2(i)?);
                let comb = d1 + 2.0 * (i - 2.0) * d2;
                rows.push(vec![Some(i), Some(d1), Some(comb), Some(d1.min(comb))]);
            }
            table(&["I", "psi_prime", "combination", "slack"], rows)
        }
        Curve::SlackEMatrix => {
            let psi = spec.to_psi();
            let mut rows = Vec::new();
            for l in lambda_grid(cfg) {
                let c = e_matrix_check(&psi, l, 1.0 / l, cfg.tau)?;
                rows.push([l, c.e11, c.e22, c.e12, c.det, c.entry_slack].map(Some).to_vec());
            }
            table(&["lambda", "e11", "e22", "e12", "det", "slack"], rows)
        }
        Curve::SlackH => {
            let h = IsochoricEnergy::from_spec(spec)?.h();
            let ts = ratio_grid(cfg);
            let fs = grid::sample(&ts, |t| h.eval(t))?;
            let rows = with_differences(&ts, &fs)
                .into_iter()
                .map(|r| vec![r[0], r[1], r[3]])
                .collect();
            table(&["t", "h", "second_difference"], rows)
        }
    }
}
