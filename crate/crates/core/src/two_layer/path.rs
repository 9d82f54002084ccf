use crate::error::{Error, Result};
use crate::math::DenseMatrix;
use crate::path::{Interpolate, PiecewisePath};

use super::params::TwoLayerParams;

impl Interpolate for TwoLayerParams {
    fn interpolate(a: &Self, b: &Self, s: f64) -> Result<Self> {
        if !a.compatible(b) {
            return Err(Error::InvalidArgument("cannot interpolate networks of different shape or activation".into()));
        }
        TwoLayerParams::new(DenseMatrix::lerp(a.a(), b.a(), s)?, DenseMatrix::lerp(a.w(), b.w(), s)?, a.activation())
    }

    fn compatible(&self, other: &Self) -> bool {
        self.same_shape(other) && self.activation() == other.activation()
    }
}

/// Seven-segment path from `p` to `q` through their half-width dropout
/// networks.
///
/// With `m = ⌊N/2⌋`, neurons `0..m` form the top half and the last `m`
/// the bottom half; for odd `N` the middle neuron keeps `a = 0` on the
/// interior vertices. Surviving output weights are scaled by `c = N/m`.
/// Every segment either moves only output weights (the output is affine
/// in `t`) or only input weights of neurons whose output weight is zero.
pub fn build_path2(p: &TwoLayerParams, q: &TwoLayerParams) -> Result<PiecewisePath<TwoLayerParams>> {
    if !p.compatible(q) {
        return Err(Error::InvalidArgument("path endpoints must share width, input dimension and activation".into()));
    }
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidArgument("path construction needs N >= 2".into()));
    }
    let m = n / 2;
    let off = n - m;
    let mid = (n % 2 == 1).then_some(m);
    let c = n as f64 / m as f64;

    let set_a = |t: &mut TwoLayerParams, i: usize, src: &[f64], scale: f64| {
        for (v, s) in t.a_mut().row_mut(i).iter_mut().zip(src) {
            *v = scale * s;
        }
    };
    let set_w = |t: &mut TwoLayerParams, i: usize, src: &[f64]| t.w_mut().row_mut(i).copy_from_slice(src);
    let zero_a = |t: &mut TwoLayerParams, i: usize| t.a_mut().row_mut(i).iter_mut().for_each(|v| *v = 0.0);

    let mut v1 = p.clone();
    for j in 0..m {
        set_a(&mut v1, j, p.a().row(j), c);
        zero_a(&mut v1, off + j);
    }
    if let Some(k) = mid {
        zero_a(&mut v1, k);
    }

    let mut v2 = v1.clone();
    for j in 0..m {
        set_w(&mut v2, off + j, q.w().row(j));
    }

    let mut v3 = v2.clone();
    for j in 0..m {
        zero_a(&mut v3, j);
        set_a(&mut v3, off + j, q.a().row(j), c);
    }

    let mut v4 = v3.clone();
    for j in 0..m {
        set_w(&mut v4, j, q.w().row(j));
    }
    if let Some(k) = mid {
        set_w(&mut v4, k, q.w().row(k));
    }

    let mut v5 = v4.clone();
    for j in 0..m {
        set_a(&mut v5, j, q.a().row(j), c);
        zero_a(&mut v5, off + j);
    }

    let mut v6 = v5.clone();
    for j in 0..m {
        set_w(&mut v6, off + j, q.w().row(off + j));
    }

    let labels = ["theta", "theta_1", "theta_2", "theta_3", "theta_4", "theta_5", "theta_6", "theta_prime"];
    PiecewisePath::new(
        vec![p.clone(), v1, v2, v3, v4, v5, v6, q.clone()],
        labels.iter().map(|s| s.to_string()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::math::{Activation, RngStream};
    use crate::model::Network;
    use crate::path::path_eval;
    use crate::two_layer::{dropout2, DropoutPattern, TwoLayerInit};

    fn probe(d: usize) -> Vec<Sample> {
        let mut rng = RngStream::new(99);
        (0..16).map(|_| Sample::new((0..d).map(|_| rng.gaussian(0.0, 1.0)).collect(), vec![])).collect()
    }

    fn outputs(p: &TwoLayerParams, xs: &[Sample]) -> Vec<f64> {
        p.predict_batch(xs).unwrap().into_iter().flatten().collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn endpoints_and_dropout_vertices() {
        for n in [2, 5, 8, 9] {
            let p = TwoLayerParams::init(n, 3, 2, Activation::Sigmoid, &TwoLayerInit::default(), 1).unwrap();
            let q = TwoLayerParams::init(n, 3, 2, Activation::Sigmoid, &TwoLayerInit::default(), 2).unwrap();
            let path = build_path2(&p, &q).unwrap();
            assert_eq!(path.segments(), 7);
            assert_eq!(path_eval(&path, 0.0).unwrap(), p);
            assert_eq!(path_eval(&path, 1.0).unwrap(), q);

            let xs = probe(3);
            let half = DropoutPattern::half(n).unwrap();
            let dp = outputs(&dropout2(&p, &half).unwrap(), &xs);
            let dq = outputs(&dropout2(&q, &half).unwrap(), &xs);
            let v = path.vertices();
            for (k, want) in [(1, &dp), (2, &dp), (3, &dq), (4, &dq), (5, &dq), (6, &dq)] {
                assert!(close(&outputs(&v[k], &xs), want, 1e-12), "N={n} vertex {k}");
            }
        }
    }

    #[test]
    fn weight_only_segments_keep_the_function() {
        let p = TwoLayerParams::init(7, 4, 1, Activation::Tanh, &TwoLayerInit::default(), 5).unwrap();
        let q = TwoLayerParams::init(7, 4, 1, Activation::Tanh, &TwoLayerInit::default(), 6).unwrap();
        let path = build_path2(&p, &q).unwrap();
        let xs = probe(4);
        for seg in [1, 3, 5] {
            let start = outputs(&path.vertices()[seg], &xs);
            for s in [0.1, 0.37, 0.9] {
                let mid = outputs(&path.point(seg, s).unwrap(), &xs);
                assert!(close(&mid, &start, 1e-14), "segment {seg}");
            }
        }
    }

    #[test]
    fn output_segments_are_affine() {
        let p = TwoLayerParams::init(6, 2, 1, Activation::Sigmoid, &TwoLayerInit::default(), 3).unwrap();
        let q = TwoLayerParams::init(6, 2, 1, Activation::Sigmoid, &TwoLayerInit::default(), 4).unwrap();
        let path = build_path2(&p, &q).unwrap();
        let xs = probe(2);
        for seg in [0, 2, 4, 6] {
            let y0 = outputs(&path.vertices()[seg], &xs);
            let y1 = outputs(&path.vertices()[seg + 1], &xs);
            let ym = outputs(&path.point(seg, 0.25).unwrap(), &xs);
            for ((a, b), m) in y0.iter().zip(&y1).zip(&ym) {
                assert!((0.75 * a + 0.25 * b - m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_endpoints_rejected() {
        let p = TwoLayerParams::init(4, 2, 1, Activation::Sigmoid, &TwoLayerInit::default(), 1).unwrap();
        let q = TwoLayerParams::init(6, 2, 1, Activation::Sigmoid, &TwoLayerInit::default(), 1).unwrap();
        assert!(build_path2(&p, &q).is_err());
        let r = TwoLayerParams::init(4, 2, 1, Activation::Tanh, &TwoLayerInit::default(), 1).unwrap();
        assert!(build_path2(&p, &r).is_err());
        let one = TwoLayerParams::init(1, 2, 1, Activation::Sigmoid, &TwoLayerInit::default(), 1).unwrap();
        assert!(build_path2(&one, &one).is_err());
    }
}
