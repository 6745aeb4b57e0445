use std::fmt::Write;

use super::ModelComparison;

/// Full-precision `family,rmsd,r2_mcf,lambda_lr,bic` rows in BIC order.
pub fn to_csv(cmp: &ModelComparison) -> String {
    let mut out = String::from("family,rmsd,r2_mcf,lambda_lr,bic\n");
    for e in &cmp.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.family, e.rmsd, e.r2_mcf, e.lambda_lr, e.bic
        );
    }
    out
}

pub fn to_json(cmp: &ModelComparison) -> String {
    serde_json::to_string_pretty(cmp).expect("comparison serialises")
}

/// Human-readable table; `λ_LR` and BIC are shown in thousands.
pub fn render_table(cmp: &ModelComparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} (n = {})", cmp.dataset, cmp.n_obs);
    let _ = writeln!(
        out,
        "{:<20} {:>10} {:>8} {:>12} {:>10} {:>8}",
        "model", "RMSD", "R2_McF", "LR (x10^3)", "BIC (x10^3)", "dBIC>6"
    );
    for (i, e) in cmp.entries.iter().enumerate() {
        let decisive = match i.checked_sub(1).map(|j| cmp.decisive[j]) {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        let _ = writeln!(
            out,
            "{:<20} {:>10.1} {:>8.3} {:>12.3} {:>10.1} {:>8}",
            e.family.as_str(),
            e.rmsd,
            e.r2_mcf,
            e.lambda_lr / 1e3,
            e.bic / 1e3,
            decisive
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::Family;
    use crate::stats::ComparisonEntry;

    fn cmp() -> ModelComparison {
        let entry = |family, bic| ComparisonEntry {
            family,
            rmsd: 49.5,
            r2_mcf: 0.195,
            lambda_lr: 3240.0,
            bic,
            parameters: 3,
            lrt_df: 1,
            lrt_log10_p: -700.0,
        };
        ModelComparison {
            dataset: "EVSE".into(),
            n_obs: 3143,
            entries: vec![
                entry(Family::PowerLawNegBin, 13_400.0),
                entry(Family::GaussianQuadratic, 32_900.0),
            ],
            decisive: vec![true],
        }
    }

    #[test]
    fn csv_keeps_full_precision() {
        let csv = to_csv(&cmp());
        assert!(csv.starts_with("family,rmsd,r2_mcf,lambda_lr,bic\n"));
        assert!(csv.contains("power_law_neg_bin,49.5,0.195,3240,13400\n"));
    }

    #[test]
    fn table_scales_to_thousands() {
        let table = render_table(&cmp());
        assert!(table.contains("13.4"));
        assert!(table.contains("3.240"));
        assert!(table.contains("yes"));
    }
}
