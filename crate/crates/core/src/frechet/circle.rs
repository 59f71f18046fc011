use crate::manifolds::wrap_angle;
use crate::scalar::Real;

/// Mean squared angular distance from `m` to the given angles.
pub fn circle_objective<T: Real>(angles: &[T], m: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let mut s = T::zero();
    for &a in angles {
        let mut d = wrap_angle(a - m);
        if d > pi {
            d = two_pi - d;
        }
        s += d * d;
    }
    s / T::lit(angles.len() as f64)
}

/// Exact intrinsic mean on `S¹`, in `[0, 2π)`.
///
/// With the angles sorted, the `j`-th candidate lifts the first `j` angles by `2π`
/// and takes the arithmetic mean. The lifted objective bounds the true one from
/// above and coincides with it at the global minimizer, so the candidate with the
/// smallest lifted objective is a global minimizer. Ties resolve to the smallest angle.
pub fn circle_frechet_mean<T: Real>(angles: &[T]) -> T {
    assert!(!angles.is_empty(), "circle_frechet_mean needs at least one angle");
    let mut a: Vec<T> = angles.iter().map(|&x| wrap_angle(x)).collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::lit(a.len() as f64);
    let two_pi = T::two_pi();
    let mut sum = T::zero();
    let mut sq = T::zero();
    for &x in &a {
        sum += x;
        sq += x * x;
    }
    let scale = sq.max(T::one());
    let tie = T::lit(1e-12).max(T::default_epsilon() * T::lit(64.0)) * scale / n;
    let mut best: Option<(T, T)> = None;
    for j in 0..a.len() {
        if j > 0 {
            let x = a[j - 1];
            sum += two_pi;
            sq += (x + two_pi) * (x + two_pi) - x * x;
        }
        let m = sum / n;
        let obj = sq / n - m * m;
        let angle = wrap_angle(m);
        best = match best {
            None => Some((obj, angle)),
            Some((bo, ba)) => {
                if obj < bo - tie || ((obj - bo).abs() <= tie && angle < ba) {
                    Some((obj.min(bo), angle))
                } else {
                    Some((bo, ba))
                }
            }
        };
    }
    best.expect("nonempty").1
}
