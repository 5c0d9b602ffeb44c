//! Flowers: a central circle ringed by petals, each tangent to the centre
//! and to its two neighbours. Includes the symmetric and classic Descartes
//! residuals, Soddy circles of a triangle, and a seeded flower generator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DescartesError {
    #[error("curvature {0} is not positive")]
    NonPositiveCurvature(f64),
    #[error("sides {0:?} violate the strict triangle inequality")]
    DegenerateTriangle([f64; 3]),
    #[error("a flower needs at least 3 petals, got {0}")]
    TooFewPetals(usize),
    #[error("no {n}-flower with branch index {beta} in the sampling range ({attempts} samples drawn)")]
    Unattainable { n: usize, beta: u32, attempts: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flower {
    pub central: f64,
    pub petals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<[f64; 2]>>,
}

impl Flower {
    pub fn new(central: f64, petals: Vec<f64>) -> Self {
        Self {
            central,
            petals,
            centers: None,
        }
    }

    fn check(&self) -> Result<(), DescartesError> {
        if self.petals.len() < 3 {
            return Err(DescartesError::TooFewPetals(self.petals.len()));
        }
        for &k in std::iter::once(&self.central).chain(&self.petals) {
            if !(k > 0.0 && k.is_finite()) {
                return Err(DescartesError::NonPositiveCurvature(k));
            }
        }
        Ok(())
    }

    /// Angles at the centre subtended by consecutive petals `j-1, j`.
    pub fn angles(&self) -> Result<Vec<f64>, DescartesError> {
        self.check()?;
        let n = self.petals.len();
        let r0 = 1.0 / self.central;
        Ok((0..n)
            .map(|j| {
                let (a, b) = (1.0 / self.petals[(j + n - 1) % n], 1.0 / self.petals[j]);
                central_angle(r0, a, b)
            })
            .collect())
    }

    pub fn angle_sum(&self) -> Result<f64, DescartesError> {
        Ok(self.angles()?.iter().sum())
    }

    /// Integer `β` with angle sum nearest `2π(β + 1)`.
    pub fn branch_index(&self) -> Result<i64, DescartesError> {
        Ok((self.angle_sum()? / (2.0 * PI)).round() as i64 - 1)
    }

    /// Flower with petal centres placed around a centre at the origin, petal
    /// 0 on the positive x-axis, turning anticlockwise.
    pub fn realized(&self) -> Result<Flower, DescartesError> {
        let angles = self.angles()?;
        let r0 = 1.0 / self.central;
        let n = self.petals.len();
        let mut phi = 0.0;
        let mut centers = Vec::with_capacity(n);
        for j in 0..n {
            if j > 0 {
                phi += angles[j];
            }
            let d = r0 + 1.0 / self.petals[j];
            centers.push([d * phi.cos(), d * phi.sin()]);
        }
        Ok(Flower {
            centers: Some(centers),
            ..self.clone()
        })
    }
}

/// Angle at the centre of a circle of radius `r0` between the centres of
/// two tangent circles of radii `a` and `b` that touch it and each other.
pub fn central_angle(r0: f64, a: f64, b: f64) -> f64 {
    // Sides r0+a, r0+b adjacent to the angle, a+b opposite; Heron gives
    // the area from s - sides = (b, a, r0).
    let (p, q, o) = (r0 + a, r0 + b, a + b);
    let s = r0 + a + b;
    let area = (s * r0 * a * b).sqrt();
    (4.0 * area).atan2(p * p + q * q - o * o)
}

/// Corner values `m_j = √((κ_j/κ_c + 1)(κ_{j-1}/κ_c + 1) - 1)` of a flower.
pub fn m_from_flower(flower: &Flower) -> Result<Vec<f64>, DescartesError> {
    flower.check()?;
    let n = flower.petals.len();
    let kc = flower.central;
    Ok((0..n)
        .map(|j| {
            let (a, b) = (flower.petals[j] / kc, flower.petals[(j + n - 1) % n] / kc);
            ((a + 1.0) * (b + 1.0) - 1.0).sqrt()
        })
        .collect())
}

/// `Im ∏ (m_j + i)`, zero exactly when the angles `2 arccot m_j` sum to a
/// multiple of 2π.
pub fn symmetric_descartes_residual(ms: &[f64]) -> f64 {
    ms.iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &m| acc * Complex64::new(m, 1.0))
        .im
}

/// [`symmetric_descartes_residual`] divided by `∏ |m_j + i|`.
pub fn normalized_descartes_residual(ms: &[f64]) -> f64 {
    let modulus: f64 = ms.iter().map(|m| (m * m + 1.0).sqrt()).product();
    symmetric_descartes_residual(ms) / modulus
}

/// `(Σκ)² - 2Σκ²`, zero for four mutually tangent circles (signed
/// curvatures, lines as zero).
pub fn classic_descartes_residual(k: [f64; 4]) -> f64 {
    let sum: f64 = k.iter().sum();
    let squares: f64 = k.iter().map(|x| x * x).sum();
    sum * sum - 2.0 * squares
}

/// A triangle with its Soddy circles: mutually externally tangent circles
/// centred at the vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleSoddy {
    /// Side lengths; side `i` is opposite vertex `i`.
    pub sides: [f64; 3],
    pub semiperimeter: f64,
    pub radii: [f64; 3],
    /// `κ_A κ_B + κ_B κ_C + κ_C κ_A`.
    pub curvature_form: f64,
}

impl TriangleSoddy {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, DescartesError> {
        let s = 0.5 * (a + b + c);
        let radii = [s - a, s - b, s - c];
        if !radii.iter().all(|&r| r > 0.0 && r.is_finite()) {
            return Err(DescartesError::DegenerateTriangle([a, b, c]));
        }
        let k = radii.map(|r| 1.0 / r);
        Ok(Self {
            sides: [a, b, c],
            semiperimeter: s,
            radii,
            curvature_form: k[0] * k[1] + k[1] * k[2] + k[2] * k[0],
        })
    }

    /// `cot(θ/2)` at each vertex: `√L / κ`.
    pub fn m_values(&self) -> [f64; 3] {
        let l = self.curvature_form.sqrt();
        self.radii.map(|r| l * r)
    }
}

pub fn soddy_radii(a: f64, b: f64, c: f64) -> Result<[f64; 3], DescartesError> {
    Ok(TriangleSoddy::new(a, b, c)?.radii)
}

const MAX_RESAMPLES: usize = 200_000;
const PETAL_RANGE: (f64, f64) = (0.1, 10.0);
const LAST_PETAL_RANGE: (f64, f64) = (1e-8, 1e8);

/// Random `n`-flower with angle sum `2π(β + 1)`. The centre has curvature 1;
/// the first `n - 1` petal radii are log-uniform in `[0.1, 10]` and the last
/// is found by bisection, resampling when no radius in `[1e-8, 1e8]` works.
/// Angles grow with every petal radius, so when even the extreme radii miss
/// the target no sample can succeed and `Unattainable` is returned at once.
pub fn random_flower(n: usize, beta: u32, seed: u64) -> Result<Flower, DescartesError> {
    if n < 3 {
        return Err(DescartesError::TooFewPetals(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = 2.0 * PI * (beta as f64 + 1.0);
    let extreme = |r: f64, last: f64| {
        (n - 2) as f64 * central_angle(1.0, r, r) + 2.0 * central_angle(1.0, r, last)
    };
    if !(extreme(PETAL_RANGE.0, LAST_PETAL_RANGE.0) < target
        && target < extreme(PETAL_RANGE.1, LAST_PETAL_RANGE.1))
    {
        return Err(DescartesError::Unattainable {
            n,
            beta,
            attempts: 0,
        });
    }
    let (lo_r, hi_r) = (PETAL_RANGE.0.ln(), PETAL_RANGE.1.ln());
    for _ in 0..MAX_RESAMPLES {
        let radii: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(lo_r..=hi_r).exp()).collect();
        let fixed: f64 = (1..n - 1).map(|j| central_angle(1.0, radii[j - 1], radii[j])).sum();
        let excess = |ln_r: f64| {
            let r = ln_r.exp();
            fixed + central_angle(1.0, radii[n - 2], r) + central_angle(1.0, r, radii[0]) - target
        };
        let (mut lo, mut hi) = (LAST_PETAL_RANGE.0.ln(), LAST_PETAL_RANGE.1.ln());
        if !(excess(lo) < 0.0 && excess(hi) > 0.0) {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let e = excess(mid);
            if e.abs() <= 1e-13 {
                lo = mid;
                hi = mid;
                break;
            }
            if e < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let last = (0.5 * (lo + hi)).exp();
        let petals = radii.iter().chain(std::iter::once(&last)).map(|r| 1.0 / r).collect();
        return Ok(Flower::new(1.0, petals));
    }
    Err(DescartesError::Unattainable {
        n,
        beta,
        attempts: MAX_RESAMPLES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    /// Angle from the cosine rule, as an independent check of the atan2 form.
    fn cosine_rule_angle(r0: f64, a: f64, b: f64) -> f64 {
        let (p, q, o) = (r0 + a, r0 + b, a + b);
        ((p * p + q * q - o * o) / (2.0 * p * q)).acos()
    }

    #[test]
    fn unit_flower_values() {
        let f = Flower::new(1.0, vec![1.0; 6]);
        let ms = m_from_flower(&f).unwrap();
        assert!(ms.iter().all(|m| (m - S3).abs() < 1e-15));
        assert!(symmetric_descartes_residual(&ms).abs() < 1e-12);
        assert!((f.angle_sum().unwrap() - 2.0 * PI).abs() < 1e-14);
        for n in 3..10 {
            let ms = m_from_flower(&Flower::new(1.0, vec![1.0; n])).unwrap();
            assert!(ms.iter().all(|m| (m - S3).abs() < 1e-15));
        }
    }

    #[test]
    fn equal_three_flower_is_not_closed() {
        let r = symmetric_descartes_residual(&[S3; 3]);
        assert!((r - 8.0).abs() < 1e-12);
    }

    #[test]
    fn tetrahedral_three_flower() {
        // Petal to centre curvature ratio 2/√3 - 1: centre corners 1/√3.
        let k = 2.0 / S3 - 1.0;
        let ms = m_from_flower(&Flower::new(1.0, vec![k; 3])).unwrap();
        for m in &ms {
            assert!((m - 1.0 / S3).abs() < 1e-12);
        }
        let (a, b, c) = (ms[0], ms[1], ms[2]);
        assert!((a * b + b * c + c * a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            m_from_flower(&Flower::new(0.0, vec![1.0; 3])),
            Err(DescartesError::NonPositiveCurvature(0.0))
        );
        assert_eq!(
            m_from_flower(&Flower::new(1.0, vec![1.0; 2])),
            Err(DescartesError::TooFewPetals(2))
        );
    }

    /// Radius of the circle inside three mutually tangent circles tangent to
    /// all of them, by Newton on its centre and radius.
    fn inner_soddy_radius(centers: [[f64; 2]; 3], radii: [f64; 3]) -> f64 {
        // Solve |p - c_i| = r + r_i for (p, r).
        let mut x = [
            (centers[0][0] + centers[1][0] + centers[2][0]) / 3.0,
            (centers[0][1] + centers[1][1] + centers[2][1]) / 3.0,
            0.1 * radii.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
        ];
        for _ in 0..100 {
            let mut jac = [[0.0; 3]; 3];
            let mut f = [0.0; 3];
            for i in 0..3 {
                let d = dist([x[0], x[1]], centers[i]);
                f[i] = d - x[2] - radii[i];
                jac[i] = [(x[0] - centers[i][0]) / d, (x[1] - centers[i][1]) / d, -1.0];
            }
            let det = |m: [[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let d0 = det(jac);
            let mut step = [0.0; 3];
            for k in 0..3 {
                let mut m = jac;
                for i in 0..3 {
                    m[i][k] = f[i];
                }
                step[k] = det(m) / d0;
            }
            for k in 0..3 {
                x[k] -= step[k];
            }
        }
        x[2]
    }

    #[test]
    fn classic_descartes() {
        let inner = inner_soddy_radius([[0.0, 0.0], [2.0, 0.0], [1.0, S3]], [1.0; 3]);
        assert!((1.0 / inner - (3.0 + 2.0 * S3)).abs() < 1e-9);
        assert!(classic_descartes_residual([1.0, 1.0, 1.0, 3.0 + 2.0 * S3]).abs() < 1e-12);
        // Two parallel lines y = ±1 and two unit circles at (0,0), (2,0).
        assert!(dist([0.0, 0.0], [2.0, 0.0]) == 2.0);
        assert_eq!(classic_descartes_residual([0.0, 0.0, 1.0, 1.0]), 0.0);
        assert_eq!(classic_descartes_residual([1.0; 4]), 8.0);
    }

    #[test]
    fn three_flowers_satisfy_classic_descartes() {
        for seed in 0..50 {
            let f = random_flower(3, 0, seed).unwrap().realized().unwrap();
            let c = f.centers.as_ref().unwrap();
            let radii = [1.0 / f.petals[0], 1.0 / f.petals[1], 1.0 / f.petals[2]];
            // The centre is the inner Soddy circle of the three petals.
            let r = inner_soddy_radius([c[0], c[1], c[2]], radii);
            assert!((r - 1.0).abs() < 1e-9, "seed {seed}: {r}");
            let k = [f.central, f.petals[0], f.petals[1], f.petals[2]];
            let scale: f64 = k.iter().sum::<f64>().powi(2);
            assert!(classic_descartes_residual(k).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn soddy_examples() {
        assert_eq!(soddy_radii(2.0, 2.0, 2.0).unwrap(), [1.0; 3]);
        let r = soddy_radii(3.0, 4.0, 5.0).unwrap();
        assert_eq!(r, [3.0, 2.0, 1.0]);
        // Vertices A, B, C opposite sides 3, 4, 5: right angle at C.
        let (a, b, c) = ([0.0, 4.0], [3.0, 0.0], [0.0, 0.0]);
        assert_eq!(dist(a, b), r[0] + r[1]);
        assert_eq!(dist(b, c), r[1] + r[2]);
        assert_eq!(dist(c, a), r[2] + r[0]);
        assert_eq!(
            soddy_radii(1.0, 1.0, 2.0),
            Err(DescartesError::DegenerateTriangle([1.0, 1.0, 2.0]))
        );
    }

    #[test]
    fn branched_flowers_need_enough_petals() {
        for n in 3..=5 {
            assert!(matches!(
                random_flower(n, 1, 0),
                Err(DescartesError::Unattainable { .. })
            ));
        }
        let f = random_flower(7, 1, 3).unwrap();
        assert_eq!(f.branch_index().unwrap(), 1);
        let ms = m_from_flower(&f).unwrap();
        assert!(normalized_descartes_residual(&ms).abs() < 1e-10);
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(random_flower(6, 0, 11), random_flower(6, 0, 11));
        assert_ne!(random_flower(6, 0, 11), random_flower(6, 0, 12));
    }

    proptest! {
        #[test]
        fn atan2_angle_matches_cosine_rule(r0 in 0.1f64..10.0, a in 0.1f64..10.0, b in 0.1f64..10.0) {
            prop_assert!((central_angle(r0, a, b) - cosine_rule_angle(r0, a, b)).abs() < 1e-9);
        }

        #[test]
        fn random_flowers_close_up(n in 3usize..10, seed in 0u64..1000) {
            let f = random_flower(n, 0, seed).unwrap();
            let ms = m_from_flower(&f).unwrap();
            prop_assert!(normalized_descartes_residual(&ms).abs() < 1e-10);
            if n == 3 {
                let (a, b, c) = (ms[0], ms[1], ms[2]);
                prop_assert!((a * b + b * c + c * a - 1.0).abs() < 1e-10);
            }
            // Consecutive petals are tangent when placed.
            let c = f.realized().unwrap().centers.unwrap();
            for j in 0..n {
                let i = (j + n - 1) % n;
                let gap = dist(c[i], c[j]) - 1.0 / f.petals[i] - 1.0 / f.petals[j];
                prop_assert!(gap.abs() < 1e-9 * (1.0 + 1.0 / f.petals[i] + 1.0 / f.petals[j]));
            }
        }

        #[test]
        fn flower_m_matches_face_m(k0 in 0.1f64..10.0, k1 in 0.1f64..10.0, k2 in 0.1f64..10.0) {
            // Centre corner of the face (centre, petal 0, petal 1) in a
            // 3-flower, through the Soddy triangle.
            let f = Flower::new(k0, vec![k1, k2, 1.0]);
            let m = m_from_flower(&f).unwrap()[1];
            let (r0, r1, r2) = (1.0 / k0, 1.0 / k1, 1.0 / k2);
            let t = TriangleSoddy::new(r1 + r2, r0 + r2, r0 + r1).unwrap();
            prop_assert!((t.m_values()[0] - m).abs() < 1e-12 * m.max(1.0));
        }
    }
}
