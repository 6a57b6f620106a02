//! Grid-supremum reports shared by the trajectory and integral sweeps.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum Target {
    #[serde(rename = "I_n")]
    I,
    #[serde(rename = "C_n")]
    C,
    #[serde(rename = "V_n")]
    V,
    #[serde(rename = "G_n")]
    G,
    AltSumsOdd,
    AltSumsEven,
    MainGest,
    #[serde(rename = "R_n")]
    R,
    RegimeC,
    /// `|q_k(t)|` along a trajectory.
    Trajectory,
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "in" | "i" => Target::I,
            "cn" | "c" => Target::C,
            "vn" | "v" => Target::V,
            "gn" | "g" => Target::G,
            "altsumsodd" | "altsums" | "odd" => Target::AltSumsOdd,
            "altsumseven" | "even" => Target::AltSumsEven,
            "maingest" => Target::MainGest,
            "rn" | "r" => Target::R,
            "regimec" | "regime" => Target::RegimeC,
            "trajectory" => Target::Trajectory,
            _ => return Err(format!("unknown target `{s}`")),
        };
        Ok(t)
    }
}

/// Partition of `(n, t)` by `gamma = t/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum Regime {
    /// `gamma <= gamma_1`
    SubResonant,
    /// `gamma >= gamma_2`
    SuperResonant,
    /// `gamma_1 < gamma <= 1`
    ResonantBelow,
    /// `1 < gamma < gamma_2`
    ResonantAbove,
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sub" | "subresonant" | "low" => Ok(Regime::SubResonant),
            "super" | "superresonant" | "high" => Ok(Regime::SuperResonant),
            "resonantbelow" | "below" => Ok(Regime::ResonantBelow),
            "resonantabove" | "above" => Ok(Regime::ResonantAbove),
            _ => Err(format!("unknown regime `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "UPPERCASE")]
pub enum SweepVerdict {
    Pass,
    Fail,
    Informational,
}

/// The same sweep on a grid of twice the density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Refinement {
    pub points: usize,
    pub empirical_sup: f64,
    pub relative_change: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct BoundSweepReport {
    pub target: Target,
    pub regime: Option<Regime>,
    /// Names of the two grid coordinates, e.g. `["n", "t"]`.
    pub axes: [String; 2],
    pub grid: Vec<[f64; 2]>,
    /// Magnitudes at the grid points.
    pub values: Vec<f64>,
    pub empirical_sup: f64,
    pub argmax: [f64; 2],
    /// Explicit bound the sup is compared against, when one is known.
    pub bound_formula: Option<f64>,
    pub verdict: SweepVerdict,
    pub refinement: Option<Refinement>,
    /// `(size parameter, sup up to it)`, e.g. over doubling T or n.
    pub doubling_trace: Vec<(f64, f64)>,
    pub notes: String,
}

/// Largest value and its first position; `None` if any value is NaN.
pub fn deterministic_max(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            return None;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

impl BoundSweepReport {
    /// Fills sup and argmax from the values. The verdict is PASS when a
    /// bound is given and respected, FAIL when violated or non-finite,
    /// INFORMATIONAL otherwise.
    pub fn new(
        target: Target,
        axes: [&str; 2],
        grid: Vec<[f64; 2]>,
        values: Vec<f64>,
        bound_formula: Option<f64>,
    ) -> Self {
        let (idx, sup) = deterministic_max(&values).unwrap_or((0, f64::NAN));
        let argmax = grid.get(idx).copied().unwrap_or([f64::NAN, f64::NAN]);
        let verdict = if !sup.is_finite() {
            SweepVerdict::Fail
        } else {
            match bound_formula {
                Some(b) if sup <= b => SweepVerdict::Pass,
                Some(_) => SweepVerdict::Fail,
                None => SweepVerdict::Informational,
            }
        };
        Self {
            target,
            regime: None,
            axes: [axes[0].to_string(), axes[1].to_string()],
            grid,
            values,
            empirical_sup: sup,
            argmax,
            bound_formula,
            verdict,
            refinement: None,
            doubling_trace: Vec::new(),
            notes: String::new(),
        }
    }

    pub fn with_refinement(mut self, points: usize, refined_sup: f64) -> Self {
        let relative_change =
            (refined_sup - self.empirical_sup).abs() / self.empirical_sup.abs().max(f64::MIN_POSITIVE);
        self.refinement = Some(Refinement {
            points,
            empirical_sup: refined_sup,
            relative_change,
        });
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_is_first_occurrence() {
        assert_eq!(deterministic_max(&[1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
        assert_eq!(deterministic_max(&[1.0, f64::NAN]), None);
        assert_eq!(deterministic_max(&[]), None);
    }

    #[test]
    fn verdicts() {
        let g = vec![[1.0, 0.0], [2.0, 1.0]];
        let r = BoundSweepReport::new(Target::C, ["n", "t"], g.clone(), vec![0.5, 0.7], Some(1.0));
        assert_eq!(r.verdict, SweepVerdict::Pass);
        assert_eq!(r.argmax, [2.0, 1.0]);
        let r = BoundSweepReport::new(Target::C, ["n", "t"], g.clone(), vec![0.5, 1.7], Some(1.0));
        assert_eq!(r.verdict, SweepVerdict::Fail);
        let r = BoundSweepReport::new(Target::C, ["n", "t"], g, vec![0.5, 1.7], None);
        assert_eq!(r.verdict, SweepVerdict::Informational);
    }

    #[test]
    fn names_parse() {
        assert_eq!("G_n".parse::<Target>().unwrap(), Target::G);
        assert_eq!("main-gest".parse::<Target>().unwrap(), Target::MainGest);
        assert_eq!("above".parse::<Regime>().unwrap(), Regime::ResonantAbove);
        assert!("x".parse::<Target>().is_err());
    }
}
