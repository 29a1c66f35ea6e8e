//! Checks of the standing modelling assumptions on a [`ModelSpec`].

use serde::{Deserialize, Serialize};

use super::kernel::JumpKernel;
use super::levy::LevyMeasureSpec;
use super::spec::{ModelSpec, Species};
use super::time_fn::TimeFunction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOptions {
    /// Permit `b_2 ≡ 0` (no predator self-limitation), needed to compare
    /// against the deterministic Rosenzweig–MacArthur limit.
    pub allow_degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub id: String,
    pub condition: String,
    pub passed: bool,
    pub severity: Severity,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub clauses: Vec<Clause>,
}

impl ValidationReport {
    /// True when every error-severity clause holds. Warnings do not fail a spec.
    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Clause> {
        self.clauses
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Warning)
    }

    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    fn push(
        &mut self,
        id: impl Into<String>,
        condition: impl Into<String>,
        passed: bool,
        detail: String,
    ) {
        self.clauses.push(Clause {
            id: id.into(),
            condition: condition.into(),
            passed,
            severity: Severity::Error,
            detail,
        });
    }

    fn warn(
        &mut self,
        id: impl Into<String>,
        condition: impl Into<String>,
        passed: bool,
        detail: String,
    ) {
        self.clauses.push(Clause {
            id: id.into(),
            condition: condition.into(),
            passed,
            severity: Severity::Warning,
            detail,
        });
    }
}

/// Evaluates every clause and returns a report; never errors.
pub fn validate_assumptions(spec: &ModelSpec, opts: ValidationOptions) -> ValidationReport {
    let mut r = ValidationReport::default();

    if let Err(e) = spec.check() {
        r.push(
            "well_formed",
            "parameters well formed",
            false,
            e.to_string(),
        );
        return r;
    }

    for sp in Species::BOTH {
        let s = spec.species(sp);
        let i = sp.index() + 1;

        let (a_inf, _) = s.a.extremes();
        r.push(
            format!("a{i}_positive"),
            format!("a_{i}(t) > 0 for all t"),
            a_inf > 0.0,
            format!("inf a_{i} = {a_inf}"),
        );

        let (b_inf, b_sup) = s.b.extremes();
        let degenerate = sp == Species::Predator && b_inf == 0.0 && b_sup == 0.0;
        if degenerate && opts.allow_degenerate {
            r.push(
                format!("b{i}_inf_positive"),
                format!("b_{i},inf > 0"),
                true,
                format!("b_{i} ≡ 0 permitted by allow_degenerate"),
            );
        } else {
            let hint = if degenerate {
                " (b_2 ≡ 0 requires --allow-degenerate)"
            } else {
                ""
            };
            r.push(
                format!("b{i}_inf_positive"),
                format!("b_{i},inf > 0"),
                b_inf > 0.0,
                format!("inf b_{i} = {b_inf}{hint}"),
            );
        }

        let (c_inf, _) = s.c.extremes();
        r.push(
            format!("c{i}_inf_positive"),
            format!("c_{i},inf > 0"),
            c_inf > 0.0,
            format!("inf c_{i} = {c_inf}"),
        );

        kernel_clause(
            &mut r,
            &format!("gamma{i}"),
            &format!("1 + γ_{i}(t,z) > 0"),
            &s.gamma,
            &spec.pi1,
        );
        kernel_clause(
            &mut r,
            &format!("delta{i}"),
            &format!("1 + δ_{i}(t,z) > 0"),
            &s.delta,
            &spec.pi2,
        );
    }

    let (m_inf, _) = spec.m.extremes();
    r.push(
        "m_inf_positive",
        "m_inf > 0",
        m_inf > 0.0,
        format!("inf m = {m_inf}"),
    );

    for (id, pi) in [("pi1_finite", &spec.pi1), ("pi2_finite", &spec.pi2)] {
        r.push(
            id,
            "Π(ℝ) < ∞",
            pi.intensity.is_finite() && pi.intensity >= 0.0,
            format!("intensity = {}", pi.intensity),
        );
    }

    r.push(
        "x0_positive",
        "x_10 > 0 and x_20 > 0",
        spec.x0[0] > 0.0 && spec.x0[1] > 0.0,
        format!("x0 = ({}, {})", spec.x0[0], spec.x0[1]),
    );

    if let Some(kappa) = spec.kappa {
        let worst = coupling_defect(&spec.predator.c, &spec.prey.c, kappa);
        r.push(
            "kappa_coupling",
            "c_2(t) = κ c_1(t)",
            worst <= 1e-12,
            format!("max |c_2 − κ c_1| = {worst:e}"),
        );
    }

    let discontinuous: Vec<&TimeFunction> = spec
        .time_functions()
        .into_iter()
        .filter(|f| f.is_piecewise() && !f.is_constant())
        .collect();
    r.warn(
        "continuity",
        "coefficients continuous in t",
        discontinuous.is_empty(),
        if discontinuous.is_empty() {
            "all coefficients continuous".into()
        } else {
            format!(
                "{} piecewise-constant coefficient(s); results assume continuity",
                discontinuous.len()
            )
        },
    );

    r
}

fn kernel_clause(
    r: &mut ValidationReport,
    id: &str,
    condition: &str,
    k: &JumpKernel,
    pi: &LevyMeasureSpec,
) {
    if pi.intensity == 0.0 || k.is_zero() {
        r.push(format!("{id}_domain"), condition, true, "inactive".into());
        r.push(
            format!("{id}_log_bounded"),
            "ln(1 + amplitude) bounded",
            true,
            "inactive".into(),
        );
        return;
    }
    let (lo, hi) = k.amplitude_bounds(&pi.marks);
    r.push(
        format!("{id}_domain"),
        condition,
        lo > -1.0,
        format!("amplitude range [{lo}, {hi}]"),
    );
    r.push(
        format!("{id}_log_bounded"),
        "ln(1 + amplitude) bounded",
        lo > -1.0 && hi.is_finite(),
        format!("ln(1 + amplitude) in [{}, {}]", lo.ln_1p(), hi.ln_1p()),
    );
}

/// Largest pointwise gap `|c_2(t) − κ c_1(t)|` over breakpoints and a dense sample.
fn coupling_defect(c2: &TimeFunction, c1: &TimeFunction, kappa: f64) -> f64 {
    let span = c1.characteristic_span().max(c2.characteristic_span());
    let mut ts: Vec<f64> = c1.breakpoints();
    ts.extend(c2.breakpoints());
    ts.extend((0..=4096).map(|k| span * k as f64 / 4096.0));
    ts.iter()
        .map(|&t| (c2.at(t) - kappa * c1.at(t)).abs())
        .fold(0.0, f64::max)
}
