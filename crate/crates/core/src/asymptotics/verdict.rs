use serde::Serialize;

/// Number of standard errors an inequality must clear to count as decided.
pub const SIGMA_GUARD: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One tested inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub name: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Guarded error bar: `SIGMA_GUARD` times the combined standard error.
    pub error_bar: f64,
    pub margin: f64,
    pub verdict: Verdict,
    /// Whether a failure should fail the run. Probes that report on
    /// questionable targets are recorded but do not gate.
    pub gating: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerdictRecord {
    /// Three-valued test of `lhs ≤ rhs`; inconclusive when the two sides are
    /// closer than the error bar.
    pub fn leq(
        name: impl Into<String>,
        inequality: impl Into<String>,
        (lhs, lhs_se): (f64, f64),
        (rhs, rhs_se): (f64, f64),
    ) -> Self {
        let rounding = 1e-12 * lhs.abs().max(rhs.abs());
        let error_bar = SIGMA_GUARD * lhs_se.hypot(rhs_se) + rounding;
        let verdict = if !(lhs.is_finite() && rhs.is_finite()) {
            Verdict::Fail
        } else if (lhs - rhs).abs() < error_bar {
            Verdict::Inconclusive
        } else if lhs <= rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerdictRecord {
            name: name.into(),
            inequality: inequality.into(),
            lhs,
            rhs,
            error_bar,
            margin: rhs - lhs,
            verdict,
            gating: true,
            note: None,
        }
    }

    /// `|value − target| ≤ tol·|target|`.
    pub fn matches(
        name: impl Into<String>,
        (value, value_se): (f64, f64),
        (target, target_se): (f64, f64),
        tol: f64,
    ) -> Self {
        let mut r = Self::leq(
            name,
            format!("|value − target| ≤ {tol}·|target|"),
            ((value - target).abs(), value_se.hypot(target_se)),
            (tol * target.abs(), 0.0),
        );
        r.note = Some(format!("value {value}, target {target}"));
        r
    }

    /// Two estimates of one quantity agree within the guarded error bar.
    pub fn agrees(
        name: impl Into<String>,
        (a, a_se): (f64, f64),
        (b, b_se): (f64, f64),
    ) -> Self {
        let rounding = 1e-12 * a.abs().max(b.abs());
        let error_bar = SIGMA_GUARD * a_se.hypot(b_se) + rounding;
        let verdict = if a.is_finite() && b.is_finite() && (a - b).abs() <= error_bar {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerdictRecord {
            name: name.into(),
            inequality: "|a − b| ≤ 3σ".into(),
            lhs: a,
            rhs: b,
            error_bar,
            margin: error_bar - (a - b).abs(),
            verdict,
            gating: true,
            note: None,
        }
    }

    pub fn non_gating(mut self, note: impl Into<String>) -> Self {
        self.gating = false;
        self.note = Some(note.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_hard_fail(&self) -> bool {
        self.gating && self.verdict == Verdict::Fail
    }
}

/// `lo ≤ value ≤ hi` as two records.
pub fn band(
    name: &str,
    (value, value_se): (f64, f64),
    (lo, lo_se): (f64, f64),
    (hi, hi_se): (f64, f64),
) -> [VerdictRecord; 2] {
    [
        VerdictRecord::leq(
            format!("{name}.lower"),
            "lower ≤ value",
            (lo, lo_se),
            (value, value_se),
        ),
        VerdictRecord::leq(
            format!("{name}.upper"),
            "value ≤ upper",
            (value, value_se),
            (hi, hi_se),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_values() {
        assert_eq!(VerdictRecord::leq("a", "", (1.0, 0.1), (2.0, 0.1)).verdict, Verdict::Pass);
        assert_eq!(VerdictRecord::leq("a", "", (2.0, 0.1), (1.0, 0.1)).verdict, Verdict::Fail);
        assert_eq!(
            VerdictRecord::leq("a", "", (1.1, 0.1), (1.0, 0.1)).verdict,
            Verdict::Inconclusive
        );
        assert_eq!(VerdictRecord::leq("a", "", (0.0, 0.0), (0.0, 0.0)).verdict, Verdict::Pass);
        assert_eq!(
            VerdictRecord::leq("a", "", (f64::NAN, 0.0), (0.0, 0.0)).verdict,
            Verdict::Fail
        );
    }

    #[test]
    fn matching_and_bands() {
        let m = VerdictRecord::matches("m", (1.02, 0.001), (1.0, 0.0), 0.05);
        assert_eq!(m.verdict, Verdict::Pass);
        let m = VerdictRecord::matches("m", (1.2, 0.001), (1.0, 0.0), 0.05);
        assert!(m.is_hard_fail());
        assert!(!m.clone().non_gating("probe").is_hard_fail());
        let [lo, hi] = band("b", (1.0, 0.0), (0.5, 0.0), (0.9, 0.0));
        assert_eq!(lo.verdict, Verdict::Pass);
        assert_eq!(hi.verdict, Verdict::Fail);
        assert_eq!(VerdictRecord::agrees("a", (1.0, 0.1), (1.2, 0.0)).verdict, Verdict::Pass);
        assert_eq!(VerdictRecord::agrees("a", (1.0, 0.01), (1.2, 0.0)).verdict, Verdict::Fail);
    }
}
