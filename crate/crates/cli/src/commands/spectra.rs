use edgechaos::activations::{published_spectrum, verified_spectrum, VerifiedSpectrum};
use edgechaos::hermite::{project, BASIS_TAG};
use serde_json::json;

use super::activation;
use crate::error::CliResult;
use crate::output::{real, Cell, Output, Table};
use crate::params::SpectraParams;

pub fn run(p: &SpectraParams, out: &mut Output) -> CliResult<()> {
    let act = activation(&p.activation)?;
    let v = match p.quad_points {
        None => verified_spectrum(&act, p.order),
        Some(points) => {
            let spectrum = project(|x| act.eval(x), p.order, points)?;
            let published = published_spectrum(act.kind(), p.order).ok();
            let discrepancies = match &published {
                Some(pb) => pb
                    .coefficients
                    .iter()
                    .zip(spectrum.coefficients())
                    .map(|(c, &q)| c.map(|c| (q - c).abs()))
                    .collect(),
                None => vec![None; p.order + 1],
            };
            VerifiedSpectrum {
                spectrum,
                quad_points: points,
                published,
                discrepancies,
            }
        }
    };

    let published = v.published.as_ref().map(|pb| {
        json!({
            "provenance": pb.provenance,
            "coefficients": pb.coefficients.iter().map(|c| c.map(real)).collect::<Vec<_>>(),
        })
    });
    out.json(
        "spectrum.json",
        &json!({
            "activation": act.spec_string(),
            "basis": BASIS_TAG,
            "order": p.order,
            "quad_points": v.quad_points,
            "coefficients": v.spectrum.coefficients().iter().map(|&c| real(c)).collect::<Vec<_>>(),
            "energy": real(v.spectrum.energy()),
            "published": published,
            "max_discrepancy": v.max_discrepancy().map(real),
        }),
    )?;

    let mut table = Table::new(&["order", "quadrature", "published", "abs_diff"]);
    for (n, &q) in v.spectrum.coefficients().iter().enumerate() {
        let pb = v.published.as_ref().and_then(|pb| pb.coefficients[n]);
        table.push(vec![n.into(), q.into(), Cell::from(pb), Cell::from(v.discrepancies[n])]);
    }
    out.table("discrepancy", &table)?;
    Ok(())
}
