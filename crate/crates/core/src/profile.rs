//! Time profile of the measurement coupling.
//!
//! The coupling is switched on over a window of duration `T` and normalized
//! so that its time integral equals `T`; the rectangular profile is the
//! reference shape, sampled profiles allow smooth ramps.

use crate::error::CoreError;

/// Normalized switching profile `Delta(t)` with `integral = duration`.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaProfile {
    /// `Delta = 1` on `[t_on, t_on + duration]`, 0 elsewhere.
    Rectangular { t_on: f64, duration: f64 },
    /// Piecewise-linear profile through `(times[i], values[i])`, rescaled at
    /// construction so the trapezoidal integral equals `duration`; zero
    /// outside the sampled range.
    Sampled {
        t_on: f64,
        duration: f64,
        /// Offsets from `t_on`, strictly increasing, spanning `[0, duration]`.
        times: Vec<f64>,
        values: Vec<f64>,
        /// Cumulative trapezoidal integral at each node.
        cumulative: Vec<f64>,
    },
}

impl DeltaProfile {
    pub fn rectangular(t_on: f64, duration: f64) -> Result<Self, CoreError> {
        if !(duration.is_finite() && duration > 0.0) || !t_on.is_finite() {
            return Err(CoreError::domain(format!(
                "rectangular profile needs finite t_on and positive duration (got t_on={t_on:e}, duration={duration:e})"
            )));
        }
        Ok(DeltaProfile::Rectangular { t_on, duration })
    }

    /// Builds a sampled profile and rescales it so its integral is exactly
    /// `duration`.
    pub fn sampled(
        t_on: f64,
        duration: f64,
        times: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(CoreError::domain(
                "sampled profile needs at least two nodes with matching times/values",
            ));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(CoreError::domain("sampled profile needs positive duration"));
        }
        if times[0] != 0.0 || (*times.last().unwrap() - duration).abs() > 1e-12 * duration {
            return Err(CoreError::domain(
                "sampled profile nodes must span [0, duration]",
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::domain(
                "sampled profile times must be strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CoreError::domain(
                "sampled profile values must be finite and non-negative",
            ));
        }
        let raw: f64 = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
            .sum();
        if raw <= 0.0 {
            return Err(CoreError::domain("sampled profile integrates to zero"));
        }
        let scale = duration / raw;
        let values: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let mut cumulative = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..times.len() {
            acc += 0.5 * (values[i - 1] + values[i]) * (times[i] - times[i - 1]);
            cumulative.push(acc);
        }
        Ok(DeltaProfile::Sampled {
            t_on,
            duration,
            times,
            values,
            cumulative,
        })
    }

    pub fn t_on(&self) -> f64 {
        match self {
            DeltaProfile::Rectangular { t_on, .. } | DeltaProfile::Sampled { t_on, .. } => *t_on,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            DeltaProfile::Rectangular { duration, .. } | DeltaProfile::Sampled { duration, .. } => {
                *duration
            }
        }
    }

    /// `Delta(t)` at absolute time `t`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            DeltaProfile::Rectangular { t_on, duration } => {
                if t >= *t_on && t <= t_on + duration {
                    1.0
                } else {
                    0.0
                }
            }
            DeltaProfile::Sampled {
                t_on,
                times,
                values,
                ..
            } => {
                let u = t - t_on;
                if u < times[0] || u > *times.last().unwrap() {
                    return 0.0;
                }
                let i = match times.partition_point(|x| *x <= u) {
                    0 => 0,
                    p => p - 1,
                };
                if i + 1 >= times.len() {
                    return *values.last().unwrap();
                }
                let w = (u - times[i]) / (times[i + 1] - times[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// `integral of Delta from t_on to t`; piecewise-exact for both shapes.
    pub fn integral_to(&self, t: f64) -> f64 {
        match self {
            DeltaProfile::Rectangular { t_on, duration } => (t - t_on).clamp(0.0, *duration),
            DeltaProfile::Sampled {
                t_on,
                times,
                values,
                cumulative,
                ..
            } => {
                let u = t - t_on;
                if u <= times[0] {
                    return 0.0;
                }
                if u >= *times.last().unwrap() {
                    return *cumulative.last().unwrap();
                }
                let i = match times.partition_point(|x| *x <= u) {
                    0 => 0,
                    p => p - 1,
                };
                let h = u - times[i];
                let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
                cumulative[i] + values[i] * h + 0.5 * slope * h * h
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rectangular_value_and_integral() {
        let p = DeltaProfile::rectangular(0.5, 2.0).unwrap();
        assert_eq!(p.value(0.4), 0.0);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(2.6), 0.0);
        assert_eq!(p.integral_to(0.2), 0.0);
        assert_relative_eq!(p.integral_to(1.5), 1.0);
        assert_relative_eq!(p.integral_to(10.0), 2.0);
    }

    #[test]
    fn sampled_profile_is_renormalized_to_duration() {
        // triangular ramp, raw integral 0.5 * base * height = 1.0 * 3.0 / 2
        let p = DeltaProfile::sampled(0.0, 1.0, vec![0.0, 0.5, 1.0], vec![0.0, 3.0, 0.0]).unwrap();
        assert_relative_eq!(p.integral_to(1.0), 1.0, max_relative = 1e-12);
        // quadrature cross-check of the running integral
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let t0 = i as f64 * h;
            acc += 0.5 * (p.value(t0) + p.value(t0 + h)) * h;
            if i % 1000 == 999 {
                assert_relative_eq!(
                    p.integral_to(t0 + h),
                    acc,
                    max_relative = 1e-9,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn sampled_rejects_bad_nodes() {
        assert!(DeltaProfile::sampled(0.0, 1.0, vec![0.0, 0.4], vec![1.0, -1.0]).is_err());
        assert!(DeltaProfile::sampled(0.0, 1.0, vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(DeltaProfile::sampled(0.0, 1.0, vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
    }
}
