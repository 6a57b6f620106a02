//! Bounded two-sided lattice sequences, the discrete Laplacian and the
//! canonical initial conditions.
//!
//! All state is in displacement coordinates `q_k`; initial velocities
//! are always zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Default evaluation half-width for initial conditions.
pub const DEFAULT_WINDOW: i64 = 256;

/// Finite window of a lattice sequence: `values[i]` sits at index
/// `offset + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LatticeSlice {
    offset: i64,
    values: Vec<f64>,
}

impl LatticeSlice {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: offset + i as i64,
            });
        }
        Ok(Self { offset, values })
    }

    pub fn zeros(lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize;
        Self {
            offset: lo,
            values: vec![0.0; len],
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Last index covered (inclusive).
    pub fn last(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        let i = k.checked_sub(self.offset)?;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    /// Value at `k`, zero outside the window.
    pub fn get_or_zero(&self, k: i64) -> f64 {
        self.get(k).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `alpha * self + beta * other` on the common window.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let lo = self.offset.max(other.offset);
        let hi = self.last().min(other.last());
        let values = (lo..=hi)
            .map(|k| alpha * self.get_or_zero(k) + beta * other.get_or_zero(k))
            .collect();
        Self { offset: lo, values }
    }
}

/// `q^Delta = -Delta q`, i.e. `2 q_k - q_{k+1} - q_{k-1}`, on the
/// interior of the slice.
pub fn discrete_laplacian(q: &LatticeSlice) -> Result<LatticeSlice> {
    if q.len() < 3 {
        return Err(Error::InsufficientSupport {
            op: "discrete_laplacian",
            len: q.len(),
            need: 3,
        });
    }
    let values = q.values.windows(3).map(|w| 2.0 * w[1] - w[2] - w[0]).collect();
    Ok(LatticeSlice {
        offset: q.offset + 1,
        values,
    })
}

/// `delta_k = q_k - q_{k-1}`, defined from the second index on.
pub fn first_difference(q: &LatticeSlice) -> Result<LatticeSlice> {
    if q.len() < 2 {
        return Err(Error::InsufficientSupport {
            op: "first_difference",
            len: q.len(),
            need: 2,
        });
    }
    let values = q.values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(LatticeSlice {
        offset: q.offset + 1,
        values,
    })
}

/// Bounded C^2 profiles sampled at integer points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum SmoothProfile {
    /// `a * exp(-(x/w)^2)`
    Gaussian { amplitude: f64, width: f64 },
    /// `a * tanh(x/w)`
    Tanh { amplitude: f64, width: f64 },
    /// `a * atan(x/w)`
    Arctan { amplitude: f64, width: f64 },
    /// `a * sin(f x)`
    Sine { amplitude: f64, frequency: f64 },
}

impl SmoothProfile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            SmoothProfile::Gaussian { amplitude, width } => amplitude * (-(x / width).powi(2)).exp(),
            SmoothProfile::Tanh { amplitude, width } => amplitude * (x / width).tanh(),
            SmoothProfile::Arctan { amplitude, width } => amplitude * (x / width).atan(),
            SmoothProfile::Sine { amplitude, frequency } => amplitude * (frequency * x).sin(),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            SmoothProfile::Gaussian { amplitude, width } => {
                let u = x / width;
                amplitude * (4.0 * u * u - 2.0) * (-u * u).exp() / (width * width)
            }
            SmoothProfile::Tanh { amplitude, width } => {
                let th = (x / width).tanh();
                -2.0 * amplitude * th * (1.0 - th * th) / (width * width)
            }
            SmoothProfile::Arctan { amplitude, width } => {
                let u = x / width;
                -2.0 * amplitude * u / (width * width * (1.0 + u * u).powi(2))
            }
            SmoothProfile::Sine { amplitude, frequency } => -amplitude * frequency * frequency * (frequency * x).sin(),
        }
    }

    /// `(lim_{x->+inf}, lim_{x->-inf})` when both exist.
    pub fn end_limits(&self) -> Option<(f64, f64)> {
        match *self {
            SmoothProfile::Gaussian { .. } => Some((0.0, 0.0)),
            SmoothProfile::Tanh { amplitude, width } => {
                let s = amplitude * width.signum();
                Some((s, -s))
            }
            SmoothProfile::Arctan { amplitude, width } => {
                let s = amplitude * width.signum() * std::f64::consts::FRAC_PI_2;
                Some((s, -s))
            }
            SmoothProfile::Sine { .. } => None,
        }
    }
}

/// Closed-form generator of `q_k(0)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Sign,
    Spike {
        b: f64,
    },
    Alternating,
    LogDecay,
    Constant {
        value: f64,
    },
    Sampled(SmoothProfile),
    /// Finite table, zero outside.
    Custom(BTreeMap<i64, f64>),
}

/// Support of `q^Delta` as known from the rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaSupport {
    /// Identically zero.
    Empty,
    Finite {
        lo: i64,
        hi: i64,
    },
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    pub rule: Rule,
    /// Evaluation half-width K: indices `-K..=K`.
    pub window: i64,
}

impl InitialCondition {
    pub fn new(rule: Rule, window: i64) -> Result<Self> {
        if window < 1 {
            return Err(Error::InvalidSpec(format!("window must be >= 1, got {window}")));
        }
        match &rule {
            Rule::Spike { b } if !b.is_finite() => {
                return Err(Error::InvalidSpec("spike height must be finite".into()))
            }
            Rule::Constant { value } if !value.is_finite() => {
                return Err(Error::InvalidSpec("constant must be finite".into()))
            }
            Rule::Custom(table) if table.values().any(|v| !v.is_finite()) => {
                return Err(Error::InvalidSpec("custom table values must be finite".into()))
            }
            Rule::Sampled(p) => {
                let finite = match *p {
                    SmoothProfile::Gaussian { amplitude, width }
                    | SmoothProfile::Tanh { amplitude, width }
                    | SmoothProfile::Arctan { amplitude, width } => {
                        amplitude.is_finite() && width.is_finite() && width != 0.0
                    }
                    SmoothProfile::Sine { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
                };
                if !finite {
                    return Err(Error::InvalidSpec(
                        "profile parameters must be finite, width nonzero".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { rule, window })
    }

    pub fn with_default_window(rule: Rule) -> Self {
        Self::new(rule, DEFAULT_WINDOW).expect("default window is valid")
    }

    pub fn sign() -> Self {
        Self::with_default_window(Rule::Sign)
    }

    pub fn spike(b: f64) -> Self {
        Self::with_default_window(Rule::Spike { b })
    }

    pub fn alternating() -> Self {
        Self::with_default_window(Rule::Alternating)
    }

    pub fn log_decay() -> Self {
        Self::with_default_window(Rule::LogDecay)
    }

    pub fn constant(value: f64) -> Self {
        Self::with_default_window(Rule::Constant { value })
    }

    pub fn custom(table: BTreeMap<i64, f64>) -> Self {
        Self::with_default_window(Rule::Custom(table))
    }

    /// `q_k(0)`.
    pub fn evaluate(&self, k: i64) -> f64 {
        match &self.rule {
            Rule::Sign => k.signum() as f64,
            Rule::Spike { b } => {
                if k == 0 {
                    *b
                } else {
                    1.0
                }
            }
            Rule::Alternating => {
                if k.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Rule::LogDecay => {
                let a = k.unsigned_abs();
                if a <= 1 {
                    0.0
                } else {
                    let l = (a as f64).ln();
                    l.ln().sin() / (l * l)
                }
            }
            Rule::Constant { value } => *value,
            Rule::Sampled(p) => p.value(k as f64),
            Rule::Custom(table) => table.get(&k).copied().unwrap_or(0.0),
        }
    }

    /// `q(0)` on `lo..=hi`.
    pub fn slice(&self, lo: i64, hi: i64) -> LatticeSlice {
        LatticeSlice {
            offset: lo,
            values: (lo..=hi).map(|k| self.evaluate(k)).collect(),
        }
    }

    /// `q(0)` on the evaluation window `-K..=K`.
    pub fn window_slice(&self) -> LatticeSlice {
        self.slice(-self.window, self.window)
    }

    /// `q^Delta` on `-half..=half`.
    pub fn q_delta(&self, half: i64) -> LatticeSlice {
        discrete_laplacian(&self.slice(-half - 1, half + 1)).expect("slice has >= 3 entries")
    }

    /// `q^Delta` on the evaluation window.
    pub fn window_q_delta(&self) -> LatticeSlice {
        self.q_delta(self.window)
    }

    pub fn delta_support(&self) -> DeltaSupport {
        match &self.rule {
            Rule::Sign | Rule::Spike { .. } => DeltaSupport::Finite { lo: -1, hi: 1 },
            Rule::Constant { .. } => DeltaSupport::Empty,
            Rule::Custom(table) => {
                let nonzero: Vec<i64> = table.iter().filter(|(_, v)| **v != 0.0).map(|(k, _)| *k).collect();
                match (nonzero.first(), nonzero.last()) {
                    (Some(lo), Some(hi)) => DeltaSupport::Finite { lo: lo - 1, hi: hi + 1 },
                    _ => DeltaSupport::Empty,
                }
            }
            Rule::Alternating | Rule::LogDecay | Rule::Sampled(_) => DeltaSupport::Unbounded,
        }
    }

    /// Short name used in file names and reports.
    pub fn name(&self) -> String {
        match &self.rule {
            Rule::Sign => "sign".into(),
            Rule::Spike { .. } => "spike".into(),
            Rule::Alternating => "alternating".into(),
            Rule::LogDecay => "log-decay".into(),
            Rule::Constant { .. } => "constant".into(),
            Rule::Sampled(_) => "sampled".into(),
            Rule::Custom(_) => "custom".into(),
        }
    }

    /// `{rule, params, window}` object.
    pub fn to_json(&self) -> Value {
        let mut params = Map::new();
        let rule = match &self.rule {
            Rule::Sign => "sign",
            Rule::Spike { b } => {
                params.insert("b".into(), Value::from(*b));
                "spike"
            }
            Rule::Alternating => "alternating",
            Rule::LogDecay => "log_decay",
            Rule::Constant { value } => {
                params.insert("value".into(), Value::from(*value));
                "constant"
            }
            Rule::Sampled(p) => {
                if let Value::Object(m) = serde_json::to_value(p).expect("profile serializes") {
                    params = m;
                }
                "sampled"
            }
            Rule::Custom(table) => {
                let t: Map<String, Value> = table.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect();
                params.insert("table".into(), Value::Object(t));
                "custom"
            }
        };
        let mut obj = Map::new();
        obj.insert("rule".into(), Value::from(rule));
        obj.insert("params".into(), Value::Object(params));
        obj.insert("window".into(), Value::from(self.window));
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidSpec("expected a JSON object".into()))?;
        let rule_name = obj
            .get("rule")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidSpec("missing string field `rule`".into()))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            None | Some(Value::Null) => &empty,
            Some(Value::Object(m)) => m,
            Some(_) => return Err(Error::InvalidSpec("`params` must be an object".into())),
        };
        let window = match obj.get("window") {
            None | Some(Value::Null) => DEFAULT_WINDOW,
            Some(w) => w
                .as_i64()
                .ok_or_else(|| Error::InvalidSpec("`window` must be an integer".into()))?,
        };
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .or_else(|| obj.get(key))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::InvalidSpec(format!("rule `{rule_name}` needs numeric `{key}`")))
        };
        let rule = match normalize(rule_name).as_str() {
            "sign" => Rule::Sign,
            "spike" => Rule::Spike { b: num("b")? },
            "alternating" => Rule::Alternating,
            "logdecay" => Rule::LogDecay,
            "constant" => Rule::Constant { value: num("value")? },
            "sampled" | "sampledfunction" => {
                let p: SmoothProfile = serde_json::from_value(Value::Object(params.clone()))
                    .map_err(|e| Error::InvalidSpec(format!("sampled profile: {e}")))?;
                Rule::Sampled(p)
            }
            "custom" => {
                let table = params
                    .get("table")
                    .or_else(|| obj.get("table"))
                    .ok_or_else(|| Error::InvalidSpec("rule `custom` needs `table`".into()))?;
                Rule::Custom(parse_table(table)?)
            }
            other => return Err(Error::InvalidSpec(format!("unknown rule `{other}`"))),
        };
        Self::new(rule, window)
    }
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn parse_table(v: &Value) -> Result<BTreeMap<i64, f64>> {
    let mut out = BTreeMap::new();
    match v {
        Value::Object(m) => {
            for (k, val) in m {
                let idx: i64 = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("table key `{k}` is not an integer")))?;
                let x = val
                    .as_f64()
                    .ok_or_else(|| Error::InvalidSpec(format!("table value at {k} is not a number")))?;
                out.insert(idx, x);
            }
        }
        Value::Array(items) => {
            for item in items {
                let pair = item
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::InvalidSpec("table entries must be [index, value] pairs".into()))?;
                let idx = pair[0]
                    .as_i64()
                    .ok_or_else(|| Error::InvalidSpec("table index must be an integer".into()))?;
                let x = pair[1]
                    .as_f64()
                    .ok_or_else(|| Error::InvalidSpec("table value must be a number".into()))?;
                out.insert(idx, x);
            }
        }
        _ => return Err(Error::InvalidSpec("`table` must be an object or array".into())),
    }
    Ok(out)
}

/// Accepts JSON objects or short forms: `sign`, `spike:3`, `alternating`,
/// `log-decay`, `constant:2`, `gaussian:amp,width`, `tanh:amp,width`,
/// `arctan:amp,width`, `sine:amp,freq`. A trailing `@K` sets the window.
impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let v: Value = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("malformed JSON: {e}")))?;
            return Self::from_json(&v);
        }
        let (body, window) = match s.rsplit_once('@') {
            Some((b, w)) => (
                b,
                w.parse::<i64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad window `{w}`")))?,
            ),
            None => (s, DEFAULT_WINDOW),
        };
        let (name, args) = match body.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (body, None),
        };
        let nums = |expected: usize| -> Result<Vec<f64>> {
            let a = args.ok_or_else(|| Error::InvalidSpec(format!("`{name}` needs {expected} argument(s)")))?;
            let v: Vec<f64> = a
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidSpec(format!("bad arguments `{a}`")))?;
            if v.len() != expected {
                return Err(Error::InvalidSpec(format!(
                    "`{name}` needs {expected} argument(s), got {}",
                    v.len()
                )));
            }
            Ok(v)
        };
        let rule = match normalize(name).as_str() {
            "sign" => Rule::Sign,
            "spike" => Rule::Spike { b: nums(1)?[0] },
            "alternating" => Rule::Alternating,
            "logdecay" => Rule::LogDecay,
            "constant" => Rule::Constant { value: nums(1)?[0] },
            "gaussian" => {
                let v = nums(2)?;
                Rule::Sampled(SmoothProfile::Gaussian {
                    amplitude: v[0],
                    width: v[1],
                })
            }
            "tanh" => {
                let v = nums(2)?;
                Rule::Sampled(SmoothProfile::Tanh {
                    amplitude: v[0],
                    width: v[1],
                })
            }
            "arctan" => {
                let v = nums(2)?;
                Rule::Sampled(SmoothProfile::Arctan {
                    amplitude: v[0],
                    width: v[1],
                })
            }
            "sine" => {
                let v = nums(2)?;
                Rule::Sampled(SmoothProfile::Sine {
                    amplitude: v[0],
                    frequency: v[1],
                })
            }
            other => return Err(Error::InvalidSpec(format!("unknown initial condition `{other}`"))),
        };
        Self::new(rule, window)
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_canonical_rules() {
        assert_eq!(InitialCondition::sign().evaluate(0), 0.0);
        assert_eq!(InitialCondition::sign().evaluate(-7), -1.0);
        assert_eq!(InitialCondition::spike(3.0).evaluate(0), 3.0);
        assert_eq!(InitialCondition::spike(3.0).evaluate(5), 1.0);
        assert_eq!(InitialCondition::alternating().evaluate(4), 1.0);
        assert_eq!(InitialCondition::alternating().evaluate(-3), -1.0);
        let ld = InitialCondition::log_decay();
        assert_eq!(ld.evaluate(1), 0.0);
        assert_eq!(ld.evaluate(-1), 0.0);
        let l = 10f64.ln();
        assert!((ld.evaluate(-10) - l.ln().sin() / (l * l)).abs() < 1e-16);
    }

    #[test]
    fn laplacian_of_sign() {
        let q = InitialCondition::sign().slice(-3, 3);
        let d = discrete_laplacian(&q).unwrap();
        assert_eq!(d.offset(), -2);
        assert_eq!(d.values(), &[0.0, -1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn laplacian_of_alternating_has_no_decay() {
        let q = InitialCondition::alternating().slice(-10, 10);
        let d = discrete_laplacian(&q).unwrap();
        for (k, v) in d.iter() {
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert_eq!(v, 4.0 * sign);
        }
        assert_eq!(d.sup_norm(), 4.0);
    }

    #[test]
    fn first_difference_examples() {
        let d = first_difference(&InitialCondition::sign().slice(-2, 2)).unwrap();
        assert_eq!(d.offset(), -1);
        assert_eq!(d.values(), &[0.0, 1.0, 1.0, 0.0]);
        let d = first_difference(&InitialCondition::alternating().slice(0, 3)).unwrap();
        assert_eq!(d.offset(), 1);
        assert_eq!(d.values(), &[-2.0, 2.0, -2.0]);
        let d = first_difference(&InitialCondition::constant(2.5).slice(-4, 4)).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short_slices_are_rejected() {
        let two = LatticeSlice::new(0, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            discrete_laplacian(&two),
            Err(Error::InsufficientSupport { need: 3, .. })
        ));
        let one = LatticeSlice::new(0, vec![1.0]).unwrap();
        assert!(first_difference(&one).is_err());
        assert!(LatticeSlice::new(0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn delta_support_of_sign_and_spike() {
        for ic in [InitialCondition::sign(), InitialCondition::spike(-2.0)] {
            let d = ic.q_delta(20);
            for (k, v) in d.iter() {
                if k.abs() > 1 {
                    assert_eq!(v, 0.0);
                }
            }
            assert_eq!(ic.delta_support(), DeltaSupport::Finite { lo: -1, hi: 1 });
        }
    }

    #[test]
    fn json_round_trip_and_short_forms() {
        for s in [
            "sign",
            "spike:3",
            "alternating",
            "log-decay@512",
            "constant:2",
            "gaussian:1,4",
            "tanh:1,3",
            "sine:1,0.5",
        ] {
            let ic: InitialCondition = s.parse().unwrap();
            let back = InitialCondition::from_json(&ic.to_json()).unwrap();
            assert_eq!(ic, back, "{s}");
        }
        let empty: InitialCondition = r#"{"rule":"custom","table":{}}"#.parse().unwrap();
        assert_eq!(empty.delta_support(), DeltaSupport::Empty);
        let t: InitialCondition = r#"{"rule":"custom","params":{"table":{"-2":1.5,"3":-1}},"window":16}"#
            .parse()
            .unwrap();
        assert_eq!(t.evaluate(-2), 1.5);
        assert_eq!(t.evaluate(0), 0.0);
        assert_eq!(t.delta_support(), DeltaSupport::Finite { lo: -3, hi: 4 });
        assert!("spike".parse::<InitialCondition>().is_err());
        assert!("{not json".parse::<InitialCondition>().is_err());
        assert!("wobble".parse::<InitialCondition>().is_err());
    }

    #[test]
    fn profile_second_derivatives_match_finite_differences() {
        let profiles = [
            SmoothProfile::Gaussian {
                amplitude: 1.3,
                width: 2.0,
            },
            SmoothProfile::Tanh {
                amplitude: -0.7,
                width: 3.0,
            },
            SmoothProfile::Arctan {
                amplitude: 2.0,
                width: 1.5,
            },
            SmoothProfile::Sine {
                amplitude: 1.0,
                frequency: 0.8,
            },
        ];
        let h = 1e-4;
        for p in &profiles {
            for &x in &[-3.0, -0.4, 0.0, 0.9, 5.0] {
                let fd = (p.value(x + h) - 2.0 * p.value(x) + p.value(x - h)) / (h * h);
                assert!((fd - p.second_derivative(x)).abs() < 1e-6, "{p:?} at {x}");
            }
        }
    }
}
