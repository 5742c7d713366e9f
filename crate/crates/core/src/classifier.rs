//! Blind classification of a streamed point cloud by a learned separatrix.
//!
//! In two dimensions the machine holds a unit-length segment, represented by
//! its mid-point and direction. Each event pulls the segment's two end points
//! towards the input, the farther point moving more, and the input is
//! classified by the side of the updated segment it falls on. The end points
//! are pulled hardest along the direction of largest variance, so the segment
//! settles perpendicular to the principal axis of the data and separates two
//! clusters lying along that axis.
//!
//! In `K` dimensions the segment becomes a regular simplex of `K` points with
//! unit edges spanning a hyperplane, and the directions are re-orthonormalized
//! with modified Gram-Schmidt after every event.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// How far an end point moves towards the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Step `(1 − α)(y − v)‖y − v‖`.
    #[default]
    DistanceWeighted,
    /// Step `(1 − α)(y − v)`.
    Linear,
}

impl UpdateRule {
    fn pull(self, v: &[f64], y: &[f64], rate: f64) -> Vec<f64> {
        let dist = v
            .iter()
            .zip(y)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        let k = match self {
            UpdateRule::DistanceWeighted => rate * dist,
            UpdateRule::Linear => rate,
        };
        v.iter().zip(y).map(|(a, b)| a + k * (b - a)).collect()
    }
}

fn side_of(value: f64) -> i8 {
    if value < 0.0 {
        -1
    } else {
        1
    }
}

/// Learned line segment in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentState {
    pub mid: [f64; 2],
    pub dir: [f64; 2],
    pub alpha: f64,
    pub rule: UpdateRule,
}

impl SegmentState {
    /// Segment centered at `mid`, pointing along the first axis.
    pub fn new(mid: [f64; 2], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InputOutOfRange {
                value: alpha,
                range: "(0, 1)",
            });
        }
        Ok(SegmentState {
            mid,
            dir: [1.0, 0.0],
            alpha,
            rule: UpdateRule::DistanceWeighted,
        })
    }

    pub fn with_rule(mut self, rule: UpdateRule) -> Self {
        self.rule = rule;
        self
    }

    /// End points `mid ∓ dir/2`.
    pub fn support_points(&self) -> [[f64; 2]; 2] {
        let h = [self.dir[0] / 2.0, self.dir[1] / 2.0];
        [
            [self.mid[0] - h[0], self.mid[1] - h[1]],
            [self.mid[0] + h[0], self.mid[1] + h[1]],
        ]
    }

    /// Side of `y` relative to the current segment: `-1` to the left of the
    /// direction of travel, `+1` to the right (and on the line).
    pub fn side(&self, y: [f64; 2]) -> i8 {
        let u = [y[0] - self.mid[0], y[1] - self.mid[1]];
        side_of(u[0] * self.dir[1] - u[1] * self.dir[0])
    }

    /// Angle of the segment direction, in `(-π, π]`.
    pub fn angle(&self) -> f64 {
        self.dir[1].atan2(self.dir[0])
    }
}

/// One classifier event: update the segment towards `y`, then report the side
/// of `y` relative to the updated segment.
///
/// The new direction runs from the updated first end point to the updated
/// second one, so the orientation is carried over from event to event. If
/// both end points coincide the previous direction is kept.
pub fn step_segment(st: SegmentState, y: [f64; 2]) -> Result<(i8, SegmentState)> {
    if !y[0].is_finite() || !y[1].is_finite() {
        return Err(Error::NonFinite);
    }
    let rate = 1.0 - st.alpha;
    let [v1, v2] = st.support_points();
    let a = st.rule.pull(&v1, &y, rate);
    let b = st.rule.pull(&v2, &y, rate);
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let d = [b[0] - a[0], b[1] - a[1]];
    let n = d[0].hypot(d[1]);
    let dir = if n > 0.0 && n.is_finite() {
        [d[0] / n, d[1] / n]
    } else {
        st.dir
    };
    let next = SegmentState { mid, dir, ..st };
    Ok((next.side(y), next))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalizes `vectors` in place with modified Gram-Schmidt.
///
/// Fails if a vector is (numerically) dependent on its predecessors.
pub fn modified_gram_schmidt(vectors: &mut [Vec<f64>]) -> Result<()> {
    for i in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        let scale = dot(v, v).sqrt();
        for q in done.iter() {
            let r = dot(q, v);
            for (a, b) in v.iter_mut().zip(q) {
                *a -= r * b;
            }
        }
        let n = dot(v, v).sqrt();
        if n.is_nan() || n <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("linearly dependent directions"));
        }
        for a in v.iter_mut() {
            *a /= n;
        }
    }
    Ok(())
}

/// Determinant by Gaussian elimination with partial pivoting; `cols` are the columns.
fn determinant(cols: &[Vec<f64>]) -> f64 {
    let k = cols.len();
    let mut m: Vec<Vec<f64>> = (0..k)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let mut det = 1.0;
    for c in 0..k {
        let p = (c..k)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap_or(c);
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = row[c] / pivot[c];
            for (a, b) in row[c..].iter_mut().zip(&pivot[c..]) {
                *a -= f * b;
            }
        }
    }
    det
}

/// Coordinates, within a `(K − 1)`-dimensional hyperplane, of a regular
/// simplex with `K` vertices, unit edges and its centroid at the origin.
///
/// For `K = 2` the vertices are `-½` and `+½`, matching the segment end points.
pub fn simplex_coordinates(k: usize) -> Vec<Vec<f64>> {
    // vertices are the scaled standard basis of R^K expressed in the
    // orthonormal basis b_i ∝ (−1, …, −1, i, 0, …) of the plane Σx = 0
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..k)
        .map(|vertex| {
            (1..k)
                .map(|i| {
                    let norm = ((i * (i + 1)) as f64).sqrt();
                    let entry = if vertex < i {
                        -1.0
                    } else if vertex == i {
                        i as f64
                    } else {
                        0.0
                    };
                    scale * entry / norm
                })
                .collect()
        })
        .collect()
}

/// Learned hyperplane segment in `K` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    mid: Vec<f64>,
    /// `K − 1` orthonormal in-plane directions.
    dirs: Vec<Vec<f64>>,
    /// Unit normal completing the directions to a basis with determinant −1.
    normal: Vec<f64>,
    coords: Vec<Vec<f64>>,
    pub alpha: f64,
    pub rule: UpdateRule,
}

impl SimplexState {
    /// Hyperplane through `mid` spanned by the first `K − 1` coordinate axes.
    pub fn new(mid: Vec<f64>, alpha: f64) -> Result<Self> {
        let k = mid.len();
        if k < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: k,
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InputOutOfRange {
                value: alpha,
                range: "(0, 1)",
            });
        }
        let dirs: Vec<Vec<f64>> = (0..k - 1)
            .map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        let normal = complete_basis(&dirs)?;
        Ok(SimplexState {
            mid,
            dirs,
            normal,
            coords: simplex_coordinates(k),
            alpha,
            rule: UpdateRule::DistanceWeighted,
        })
    }

    pub fn with_rule(mut self, rule: UpdateRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn dim(&self) -> usize {
        self.mid.len()
    }

    pub fn mid(&self) -> &[f64] {
        &self.mid
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.dirs
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    /// The `K` simplex vertices in input space.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.coords
            .iter()
            .map(|c| {
                let mut p = self.mid.clone();
                for (ci, d) in c.iter().zip(&self.dirs) {
                    for (a, b) in p.iter_mut().zip(d) {
                        *a += ci * b;
                    }
                }
                p
            })
            .collect()
    }

    pub fn side(&self, y: &[f64]) -> i8 {
        let u: Vec<f64> = y.iter().zip(&self.mid).map(|(a, b)| a - b).collect();
        side_of(dot(&u, &self.normal))
    }
}

/// Unit normal to `dirs`, signed so that `det[dirs…, normal] = −1`.
fn complete_basis(dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = dirs.len() + 1;
    // pick the coordinate axis with the largest residual for numerical safety
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0;
    for axis in 0..k {
        let mut v: Vec<f64> = (0..k).map(|j| f64::from(u8::from(j == axis))).collect();
        for d in dirs {
            let r = dot(d, &v);
            for (a, b) in v.iter_mut().zip(d) {
                *a -= r * b;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > best_norm {
            best_norm = n;
            best = Some(v);
        }
    }
    let mut n = best.ok_or(Error::Degenerate("empty basis"))?;
    let mut basis = vec![n.clone()];
    modified_gram_schmidt(&mut basis)?;
    n.clone_from(&basis[0]);
    let mut cols = dirs.to_vec();
    cols.push(n.clone());
    if determinant(&cols) > 0.0 {
        for a in &mut n {
            *a = -*a;
        }
    }
    Ok(n)
}

/// One `K`-dimensional classifier event.
///
/// Every vertex is pulled towards `y`; the new mid-point is the vertex mean and
/// direction `i` is `Σₖ cₖᵢ (v̂ₖ − mid')` re-orthonormalized, which for `K = 2`
/// is exactly the segment update. If the pulled vertices no longer span a
/// hyperplane the previous directions are kept.
pub fn step_simplex(st: &SimplexState, y: &[f64]) -> Result<(i8, SimplexState)> {
    let k = st.dim();
    if y.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let rate = 1.0 - st.alpha;
    let moved: Vec<Vec<f64>> = st
        .points()
        .iter()
        .map(|v| st.rule.pull(v, y, rate))
        .collect();
    let mut mid = vec![0.0; k];
    for p in &moved {
        for (m, a) in mid.iter_mut().zip(p) {
            *m += a / k as f64;
        }
    }
    let mut dirs: Vec<Vec<f64>> = (0..k - 1)
        .map(|i| {
            let mut d = vec![0.0; k];
            for (c, p) in st.coords.iter().zip(&moved) {
                for ((a, b), m) in d.iter_mut().zip(p).zip(&mid) {
                    *a += c[i] * (b - m);
                }
            }
            d
        })
        .collect();
    let (dirs, normal) = match modified_gram_schmidt(&mut dirs).and_then(|_| complete_basis(&dirs))
    {
        Ok(n) => (dirs, n),
        Err(_) => (st.dirs.clone(), st.normal.clone()),
    };
    let next = SimplexState {
        mid,
        dirs,
        normal,
        coords: st.coords.clone(),
        alpha: st.alpha,
        rule: st.rule,
    };
    Ok((next.side(y), next))
}

/// Draws event `n` of a stream of two Gaussian clouds (standard deviation
/// `√½` per axis) whose centers sit at opposite ends of a unit-circle
/// diameter turning by `γπ` per event.
pub fn generate_rotating_gaussians<R: Rng + ?Sized>(gamma: f64, n: u64, rng: &mut R) -> [f64; 2] {
    let noise = Normal::new(0.0, 0.5f64.sqrt()).expect("valid standard deviation");
    let s = f64::from(u8::from(rng.random::<bool>()));
    let a = (gamma * n as f64 + s) * std::f64::consts::PI;
    [a.cos() + noise.sample(rng), a.sin() + noise.sample(rng)]
}

/// Principal axes of a planar point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pca {
    /// Unit eigenvector of the sample covariance with the largest eigenvalue.
    pub direction: [f64; 2],
    /// Eigenvalues, largest first.
    pub eigenvalues: [f64; 2],
    /// Set when the two eigenvalues agree to within 1 % of their sum, so the direction is arbitrary.
    pub degenerate: bool,
}

/// Closed-form principal direction of the sample covariance of `points`.
pub fn pca_oracle(points: &[[f64; 2]]) -> Result<Pca> {
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least two points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    let (a, b, c) = (a / (n - 1.0), b / (n - 1.0), c / (n - 1.0));
    if a + c == 0.0 {
        return Err(Error::Degenerate("all points identical"));
    }
    let half_trace = (a + c) / 2.0;
    let gap = ((a - c) / 2.0).hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    Ok(Pca {
        direction: [theta.cos(), theta.sin()],
        eigenvalues: [half_trace + gap, half_trace - gap],
        degenerate: 2.0 * gap <= 0.01 * (a + c),
    })
}

/// Angle between two undirected lines with directions `a` and `b`, in `[0, π/2]`.
pub fn line_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    let c = (a[0] * b[0] + a[1] * b[1]).abs() / (a[0].hypot(a[1]) * b[0].hypot(b[1]));
    c.min(1.0).acos()
}

/// Direction of the separatrix a principal-component classifier draws:
/// perpendicular to the principal direction.
pub fn pca_separatrix(p: &Pca) -> [f64; 2] {
    [-p.direction[1], p.direction[0]]
}

/// Comparison of the learned segment with windowed PCA.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    /// Per window: the learned direction after its last point, the PCA
    /// separatrix of its points, and the angle between the two lines (radians).
    pub windows: Vec<([f64; 2], [f64; 2], f64)>,
}

impl WindowReport {
    /// Fraction of windows whose angle is below `tol` radians.
    pub fn fraction_within(&self, tol: f64) -> f64 {
        if self.windows.is_empty() {
            return f64::NAN;
        }
        let hits = self.windows.iter().filter(|w| w.2 < tol).count();
        hits as f64 / self.windows.len() as f64
    }
}

/// Feeds `points` to the segment in order, and after every full window of
/// `window` points compares its direction with the PCA separatrix of that window.
pub fn windowed_agreement(
    st: &mut SegmentState,
    points: &[[f64; 2]],
    window: usize,
) -> Result<WindowReport> {
    if window < 2 {
        return Err(Error::Config("window must hold at least two points".into()));
    }
    let mut windows = Vec::with_capacity(points.len() / window);
    for chunk in points.chunks_exact(window) {
        for &y in chunk {
            *st = step_segment(*st, y)?.1;
        }
        let sep = pca_separatrix(&pca_oracle(chunk)?);
        windows.push((st.dir, sep, line_angle(st.dir, sep)));
    }
    Ok(WindowReport { windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn input_at_mid_keeps_direction() {
        let st = SegmentState::new([0.2, -0.1], 0.9).unwrap();
        let (_, next) = step_segment(st, [0.2, -0.1]).unwrap();
        assert_eq!(next.dir, [1.0, 0.0]);
        assert!((next.mid[0] - 0.2).abs() < 1e-15 && (next.mid[1] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn side_convention() {
        let st = SegmentState::new([0.0, 0.0], 0.9).unwrap();
        assert_eq!(st.side([0.0, 1.0]), -1);
        assert_eq!(st.side([0.0, -1.0]), 1);
        assert_eq!(st.side([3.0, 0.0]), 1);
    }

    #[test]
    fn farther_point_moves_more() {
        let st = SegmentState::new([0.0, 0.0], 0.9).unwrap();
        let [v1, v2] = st.support_points();
        let y = [2.0, 0.7];
        let a = st.rule.pull(&v1, &y, 0.1);
        let b = st.rule.pull(&v2, &y, 0.1);
        let step = |p: &[f64], q: &[f64]| (p[0] - q[0]).hypot(p[1] - q[1]);
        assert!(step(&a, &v1) > step(&b, &v2));
    }

    #[test]
    fn gram_schmidt_orthonormal() {
        let mut v = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ];
        modified_gram_schmidt(&mut v).unwrap();
        for i in 0..3 {
            assert!((dot(&v[i], &v[i]) - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(dot(&v[i], &v[j]).abs() < 1e-12);
            }
        }
        let mut dep = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(modified_gram_schmidt(&mut dep).is_err());
    }

    #[test]
    fn simplex_has_unit_edges() {
        for k in 2..6 {
            let c = simplex_coordinates(k);
            for i in 0..k {
                for j in 0..i {
                    let d: f64 = c[i].iter().zip(&c[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    assert!((d.sqrt() - 1.0).abs() < 1e-12);
                }
            }
            let centroid: f64 = (0..k - 1)
                .map(|i| c.iter().map(|v| v[i]).sum::<f64>().abs())
                .sum();
            assert!(centroid < 1e-12);
        }
        assert_eq!(simplex_coordinates(2), vec![vec![-0.5], vec![0.5]]);
    }

    #[test]
    fn normal_orientation_matches_segment() {
        let st = SimplexState::new(vec![0.0, 0.0], 0.9).unwrap();
        assert_eq!(st.normal(), &[0.0, -1.0]);
        let st = SimplexState::new(vec![0.0; 3], 0.9).unwrap();
        let mut cols = st.directions().to_vec();
        cols.push(st.normal().to_vec());
        assert!((determinant(&cols) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pca_cases() {
        let p = pca_oracle(&[[-1.0, 0.0], [0.5, 0.0], [2.0, 0.0]]).unwrap();
        assert!((p.direction[0].abs() - 1.0).abs() < 1e-12);
        assert!(!p.degenerate);
        let iso = pca_oracle(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]).unwrap();
        assert!(iso.degenerate);
        assert!(pca_oracle(&[[1.0, 1.0]; 5]).is_err());
        assert!(pca_oracle(&[[1.0, 1.0]]).is_err());
    }

    #[test]
    fn static_stream_is_two_antipodal_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let (mut pos, mut sx) = (0usize, 0.0);
        for i in 0..n {
            let p = generate_rotating_gaussians(0.0, i, &mut rng);
            sx += p[0];
            if p[0] > 0.0 {
                pos += 1;
            }
        }
        assert!((sx / n as f64).abs() < 0.03);
        assert!((pos as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn stream_centers_rotate_with_period() {
        // after half a period the clouds have swapped ends
        let gamma = 1.0 / 5000.0;
        let a = gamma * 5000.0 * std::f64::consts::PI;
        assert!((a.cos() + 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let window: Vec<[f64; 2]> = (2500..2600)
            .map(|i| generate_rotating_gaussians(gamma, i, &mut rng))
            .collect();
        // centers near (0, ±1): principal axis is vertical
        let p = pca_oracle(&window).unwrap();
        assert!(line_angle(p.direction, [0.0, 1.0]) < 15f64.to_radians());
    }

    #[test]
    fn segment_is_perpendicular_to_principal_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let axis = 0.5f64;
        let (c, s) = (axis.cos(), axis.sin());
        let mut st = SegmentState::new([0.0, 0.0], 0.99).unwrap();
        let mut pts = Vec::new();
        for _ in 0..20_000 {
            let (u, v) = (1.5 * noise.sample(&mut rng), 0.4 * noise.sample(&mut rng));
            let y = [0.3 + c * u - s * v, -0.2 + s * u + c * v];
            pts.push(y);
            st = step_segment(st, y).unwrap().1;
        }
        assert!(
            line_angle(st.dir, [-s, c]) < 10f64.to_radians(),
            "{:?}",
            st.dir
        );
        let p = pca_oracle(&pts).unwrap();
        assert!(line_angle(st.dir, pca_separatrix(&p)) < 10f64.to_radians());
    }

    #[test]
    fn mid_point_tracks_the_mean() {
        // a single snapshot jitters by about 0.1 along the major axis, so the
        // time average after the transient is compared with the mean
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut st = SegmentState::new([0.8, -0.6], 0.99).unwrap();
        let (mut sum, mut count) = ([0.0, 0.0], 0.0);
        for i in 0..25_000u64 {
            let y = generate_rotating_gaussians(0.0, i, &mut rng);
            let y = [y[0] + 0.4, y[1] - 0.3];
            st = step_segment(st, y).unwrap().1;
            if i >= 5000 {
                sum[0] += st.mid[0];
                sum[1] += st.mid[1];
                count += 1.0;
            }
        }
        assert!((sum[0] / count - 0.4).abs() < 0.05, "{}", sum[0] / count);
        assert!((sum[1] / count + 0.3).abs() < 0.05, "{}", sum[1] / count);
    }

    #[test]
    fn simplex_in_two_dimensions_is_the_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut seg = SegmentState::new([0.1, 0.2], 0.97).unwrap();
        let mut sim = SimplexState::new(vec![0.1, 0.2], 0.97).unwrap();
        for i in 0..2000 {
            let y = generate_rotating_gaussians(1.0 / 500.0, i, &mut rng);
            let (a, s1) = step_segment(seg, y).unwrap();
            let (b, s2) = step_simplex(&sim, &y).unwrap();
            assert_eq!(a, b, "event {i}");
            seg = s1;
            sim = s2;
        }
        assert!((seg.dir[0] - sim.directions()[0][0]).abs() < 1e-9);
        assert!((seg.mid[1] - sim.mid()[1]).abs() < 1e-9);
    }

    #[test]
    fn three_dimensional_normal_follows_largest_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let sd = [0.3, 1.5, 0.7];
        let mut st = SimplexState::new(vec![0.0; 3], 0.99).unwrap();
        for _ in 0..30_000 {
            let y: Vec<f64> = sd.iter().map(|s| s * noise.sample(&mut rng)).collect();
            st = step_simplex(&st, &y).unwrap().1;
        }
        let n = st.normal();
        assert!(n[1].abs() > 0.95, "normal {n:?}");
        for (i, a) in st.directions().iter().enumerate() {
            for b in &st.directions()[..i] {
                assert!(dot(a, b).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn direction_stays_unit(
            ys in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..300),
            alpha in 0.5f64..0.999,
            linear in any::<bool>(),
        ) {
            let rule = if linear { UpdateRule::Linear } else { UpdateRule::DistanceWeighted };
            let mut st = SegmentState::new([0.0, 0.0], alpha).unwrap().with_rule(rule);
            for (a, b) in ys {
                st = step_segment(st, [a, b]).unwrap().1;
                prop_assert!((st.dir[0].hypot(st.dir[1]) - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn pull_grows_with_distance(d1 in 0.01f64..5.0, extra in 0.01f64..5.0, phi in -3.0f64..3.0) {
            let v = [0.0, 0.0];
            let dir = [phi.cos(), phi.sin()];
            let near = UpdateRule::DistanceWeighted.pull(&v, &[d1 * dir[0], d1 * dir[1]], 0.01);
            let d2 = d1 + extra;
            let far = UpdateRule::DistanceWeighted.pull(&v, &[d2 * dir[0], d2 * dir[1]], 0.01);
            prop_assert!(far[0].hypot(far[1]) > near[0].hypot(near[1]));
        }
    }
}
