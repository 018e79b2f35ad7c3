use std::fmt::Write;

use crate::report::{Report, Status};

/// Human-readable rendering of a report.
pub fn to_text(report: &Report) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "qfock {} (schema {})  n_fixed={} lambdas={:?} q={} d={} seed={}",
        report.command,
        report.schema_version,
        c.spec.n_fixed,
        c.spec.rotation_lambdas,
        c.q,
        c.truncation,
        report.seed
    );
    if !report.suites.is_empty() {
        let _ = writeln!(out, "\nsuites:");
        for s in &report.suites {
            let tag = match s.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let residual = s
                .max_residual
                .map(|r| format!("  max residual {r:.3e}"))
                .unwrap_or_default();
            let _ = writeln!(out, "  [{tag}] {:<24}{residual}", s.name);
            let _ = writeln!(out, "         {}  ({})", s.anchor, s.detail);
        }
    }
    if !report.conditioning.is_empty() {
        let _ = writeln!(out, "\nconditioning:");
        let _ = writeln!(
            out,
            "  {:>3}  {:>12}  {:>12}  {:>12}",
            "n", "min eig", "max eig", "cond"
        );
        for row in &report.conditioning {
            let _ = writeln!(
                out,
                "  {:>3}  {:>12.5e}  {:>12.5e}  {:>12.5e}",
                row.degree, row.min_eigenvalue, row.max_eigenvalue, row.condition_number
            );
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if let Some(rows) = &report.moments {
        let _ = writeln!(out, "\nmoments:");
        for row in rows {
            let poly = polynomial(&row.coefficients);
            let op = row
                .operator
                .map(|v| format!("{v:.12}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "  m_{:<2} = {:<28} combinatorial {:.12}  operator {op}",
                row.n, poly, row.combinatorial
            );
        }
    }
    if let Some(rows) = &report.centralizer {
        let _ = writeln!(out, "\ncentralizer words:");
        for row in rows {
            let _ = writeln!(
                out,
                "  degree {}: {} words (fixed subspace {})",
                row.degree, row.count, row.fixed_subspace_dimension
            );
            for w in &row.words {
                let _ = writeln!(out, "    {w}");
            }
        }
    }
    if let Some(v) = &report.verdict {
        let _ = writeln!(out, "\ntype: {}", v.label);
        let _ = writeln!(out, "  log λ: {:?}", v.group_generators);
        let _ = writeln!(out, "  {}", v.rationale);
        if let Some(caveat) = &v.caveat {
            let _ = writeln!(out, "  caveat: {caveat}");
        }
    }
    if let Some(m) = &report.mixing {
        let _ = writeln!(out, "\nmixing: ξ_0 = {}, x = {}, y = {}", m.xi0, m.x, m.y);
        let _ = writeln!(
            out,
            "  {:>3}  {:>14}  {:>14}  {:>14}",
            "n", "Re T_nn", "a_n", "Σ a_k"
        );
        for n in 0..m.hs_terms.len() {
            let diag = m.t_diagonal.get(n).copied().unwrap_or(0.0);
            let _ = writeln!(
                out,
                "  {:>3}  {:>14.6e}  {:>14.6e}  {:>14.10}",
                n, diag, m.hs_terms[n], m.hs_partial_sums[n]
            );
        }
        match m.ratio {
            Some(r) => {
                let _ = writeln!(out, "  ratio estimate {r:.6}");
            }
            None => {
                let _ = writeln!(out, "  ratio estimate unavailable");
            }
        }
        if let Some(decay) = &m.decay {
            let decay: Vec<String> = decay.iter().map(|v| format!("{v:.3e}")).collect();
            let _ = writeln!(out, "  decay [{}]", decay.join(", "));
        }
        for (name, k) in &m.intersections {
            let _ = writeln!(out, "  intersection with {name}: {k}");
        }
    }
    let _ = writeln!(
        out,
        "\nresult: {}",
        if report.passed() { "pass" } else { "fail" }
    );
    out
}

fn polynomial(coeffs: &[u64]) -> String {
    if coeffs.is_empty() {
        return "0".into();
    }
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| match k {
            0 => c.to_string(),
            1 if c == 1 => "q".into(),
            1 => format!("{c}q"),
            _ if c == 1 => format!("q^{k}"),
            _ => format!("{c}q^{k}"),
        })
        .collect();
    terms.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::polynomial;

    #[test]
    fn polynomial_rendering() {
        assert_eq!(polynomial(&[5, 6, 3, 1]), "5 + 6q + 3q^2 + q^3");
        assert_eq!(polynomial(&[2, 1]), "2 + q");
        assert_eq!(polynomial(&[]), "0");
    }
}
