use crate::error::{Error, Result};
use crate::math::DenseMatrix;
use crate::path::{Interpolate, PiecewisePath};

use super::params::MultilayerParams;

impl Interpolate for MultilayerParams {
    fn interpolate(a: &Self, b: &Self, s: f64) -> Result<Self> {
        if !a.compatible(b) {
            return Err(Error::InvalidArgument("cannot interpolate networks of different architecture".into()));
        }
        let weights = a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| DenseMatrix::lerp(x, y, s))
            .collect::<Result<_>>()?;
        MultilayerParams::new(weights, a.activations().to_vec())
    }

    fn compatible(&self, other: &Self) -> bool {
        self.same_shape(other) && self.activations() == other.activations()
    }
}

/// How the lowest modified matrix of a half-swap stage is rewritten.
#[derive(Clone, Copy)]
enum Lowest {
    /// A hidden-to-hidden matrix whose input layer gets halved as well:
    /// rows become `[2·S_tt | 0]`, and the bottom rows end at zero.
    Halve,
    /// The input matrix: rows are copied from the source network, the
    /// bottom rows ending at the source's own bottom rows.
    Copy,
}

struct Builder {
    cur: MultilayerParams,
    vertices: Vec<MultilayerParams>,
    labels: Vec<String>,
    h: usize,
}

impl Builder {
    fn new(start: &MultilayerParams, label: &str) -> Self {
        let h = start.width(1) / 2;
        Self { cur: start.clone(), vertices: vec![start.clone()], labels: vec![label.to_string()], h }
    }

    fn push(&mut self, label: String) {
        self.vertices.push(self.cur.clone());
        self.labels.push(label);
    }

    fn m(&mut self, idx: usize) -> &mut DenseMatrix {
        &mut self.cur.weights_mut()[idx]
    }

    /// Block `(rows r0.., cols c0..)` of size `h × h` := `scale · src_tt`.
    fn set_block(&mut self, idx: usize, r0: usize, c0: usize, src: Option<&DenseMatrix>, scale: f64) {
        let h = self.h;
        let m = self.m(idx);
        for r in 0..h {
            for c in 0..h {
                m.set(r0 + r, c0 + c, src.map_or(0.0, |s| scale * s.get(r, c)));
            }
        }
    }

    /// Last matrix := `[2·src_t | 0]` (`bottom = false`) or `[0 | 2·src_t]`.
    fn set_last(&mut self, src: &DenseMatrix, bottom: bool) {
        let h = self.h;
        let last = self.cur.weights().len() - 1;
        let m = self.m(last);
        for o in 0..m.rows() {
            for j in 0..h {
                let v = 2.0 * src.get(o, j);
                let (on, off) = if bottom { (h + j, j) } else { (j, h + j) };
                m.set(o, on, v);
                m.set(o, off, 0.0);
            }
        }
    }

    /// Rows `r0..r0+h` of matrix `idx` := rows `s0..s0+h` of `src`, or
    /// `[2·src_tt | 0]` in `Halve` mode, or zero when `src` is `None`.
    fn set_rows(&mut self, idx: usize, r0: usize, src: Option<(&DenseMatrix, usize)>, mode: Lowest) {
        let h = self.h;
        let m = self.m(idx);
        let cols = m.cols();
        for r in 0..h {
            for c in 0..cols {
                let v = match (src, mode) {
                    (None, _) => 0.0,
                    (Some((s, s0)), Lowest::Copy) => s.get(s0 + r, c),
                    (Some((s, _)), Lowest::Halve) => {
                        if c < h {
                            2.0 * s.get(r, c)
                        } else {
                            0.0
                        }
                    }
                };
                m.set(r0 + r, c, v);
            }
        }
    }

    /// Moves the active sub-network from the top half of the layers above
    /// matrix `m0` to a bottom-half copy built from `src`, then back into the
    /// top half, with the rows of matrix `m0` rewritten per `mode`.
    fn half_swap(&mut self, m0: usize, src: &MultilayerParams, mode: Lowest, tag: &str) {
        let h = self.h;
        let last = self.cur.weights().len() - 1;
        let sw = src.weights();
        let mut step = 0;
        let label = |step: &mut usize| {
            *step += 1;
            format!("{tag}.{step}")
        };

        self.set_rows(m0, h, Some((&sw[m0], 0)), mode);
        self.push(label(&mut step));
        for i in m0 + 1..last {
            self.set_block(i, h, h, Some(&sw[i]), 2.0);
            self.push(label(&mut step));
        }
        self.set_last(&sw[last], true);
        self.push(label(&mut step));
        for i in (m0 + 1..last).rev() {
            self.set_block(i, 0, 0, None, 0.0);
            self.push(label(&mut step));
        }
        self.set_rows(m0, 0, Some((&sw[m0], 0)), mode);
        self.push(label(&mut step));
        for i in m0 + 1..last {
            self.set_block(i, 0, 0, Some(&sw[i]), 2.0);
            self.push(label(&mut step));
        }
        self.set_last(&sw[last], false);
        self.push(label(&mut step));
        for i in (m0 + 1..last).rev() {
            self.set_block(i, h, h, None, 0.0);
            self.push(label(&mut step));
        }
        match mode {
            Lowest::Halve => self.set_rows(m0, h, None, mode),
            Lowest::Copy => self.set_rows(m0, h, Some((&sw[m0], h)), mode),
        }
        self.push(label(&mut step));
    }
}

/// From `p` to the network keeping the top half of every hidden layer
/// (all but the first matrix rewritten in doubled-top-block form).
fn descend(p: &MultilayerParams, name: &str) -> Builder {
    let mut b = Builder::new(p, name);
    let last = p.weights().len() - 1;
    b.set_last(&p.weights()[last], false);
    b.push(format!("{name}.S{}", p.hidden()));
    for k in (2..=p.hidden()).rev() {
        b.half_swap(k - 1, p, Lowest::Halve, &format!("{name}.S{k}"));
    }
    b
}

/// Path from `p` to `q` through their nested half-width dropout networks,
/// one weight block per segment.
///
/// Each segment either changes only the output matrix (the output is
/// affine along it), or changes weights feeding neurons whose outgoing
/// weights are all zero, or swaps between two identical stacked copies of
/// a sub-network. Requires equal, even hidden widths.
pub fn build_path_ml(p: &MultilayerParams, q: &MultilayerParams) -> Result<PiecewisePath<MultilayerParams>> {
    if !p.compatible(q) {
        return Err(Error::InvalidArgument("path endpoints must share architecture and activations".into()));
    }
    let n = p
        .uniform_width()
        .ok_or_else(|| Error::InvalidArgument("path construction needs equal hidden widths".into()))?;
    if n % 2 != 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("path construction needs an even width, got {n}")));
    }
    if p.d_out() == 0 {
        return Err(Error::InvalidArgument("network has no outputs".into()));
    }

    let mut forward = descend(p, "theta");
    forward.half_swap(0, q, Lowest::Copy, "bridge");
    let back = descend(q, "theta_bar");
    if back.cur != forward.cur {
        return Err(Error::InvalidArgument("internal: bridge does not meet the second descent".into()));
    }
    let mut vertices = forward.vertices;
    let mut labels = forward.labels;
    vertices.extend(back.vertices.into_iter().rev().skip(1));
    labels.extend(back.labels.into_iter().rev().skip(1));
    PiecewisePath::new(vertices, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::math::{Activation, RngStream};
    use crate::model::Network;
    use crate::multilayer::{dropout_ml, nested_half_patterns, MultilayerArch};
    use crate::path::path_eval;

    fn probe(d: usize) -> Vec<Sample> {
        let mut rng = RngStream::new(8);
        (0..12).map(|_| Sample::new((0..d).map(|_| rng.gaussian(0.0, 1.0)).collect(), vec![])).collect()
    }

    fn outputs(p: &MultilayerParams, xs: &[Sample]) -> Vec<f64> {
        p.predict_batch(xs).unwrap().into_iter().flatten().collect()
    }

    fn pair(l: usize, n: usize) -> (MultilayerParams, MultilayerParams) {
        let arch = MultilayerArch::uniform(3, n, l, 2, Activation::Tanh);
        (MultilayerParams::init(&arch, 1).unwrap(), MultilayerParams::init(&arch, 2).unwrap())
    }

    #[test]
    fn endpoints_are_exact() {
        for l in [1, 2, 3] {
            let (p, q) = pair(l, 4);
            let path = build_path_ml(&p, &q).unwrap();
            assert_eq!(path_eval(&path, 0.0).unwrap(), p);
            assert_eq!(path_eval(&path, 1.0).unwrap(), q);
        }
    }

    #[test]
    fn segment_count() {
        // base 1; each induction stage 4(L−k)+5; bridge 4(L−1)+5.
        for l in [1usize, 2, 3] {
            let (p, q) = pair(l, 4);
            let stages: usize = (2..=l).map(|k| 4 * (l - k) + 5).sum();
            let one_side = 1 + stages;
            let expected = 2 * one_side + 4 * (l - 1) + 5;
            assert_eq!(build_path_ml(&p, &q).unwrap().segments(), expected);
        }
    }

    /// Every vertex computes the full net, one of the nested dropout nets of
    /// either endpoint, or a function reached from one by the convex
    /// output-layer segment.
    #[test]
    fn vertices_compute_nested_dropout_networks() {
        let (p, q) = pair(3, 4);
        let xs = probe(3);
        let mut targets = vec![outputs(&p, &xs), outputs(&q, &xs)];
        for net in [&p, &q] {
            for pat in nested_half_patterns(net).unwrap() {
                targets.push(outputs(&dropout_ml(net, &pat).unwrap(), &xs));
            }
        }
        let path = build_path_ml(&p, &q).unwrap();
        let matches = |v: &[f64]| targets.iter().any(|t| t.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-12));
        for (v, label) in path.vertices().iter().zip(path.labels()) {
            assert!(matches(&outputs(v, &xs)), "vertex {label}");
        }
    }

    #[test]
    fn segments_are_constant_or_affine() {
        let (p, q) = pair(2, 6);
        let xs = probe(3);
        let path = build_path_ml(&p, &q).unwrap();
        for seg in 0..path.segments() {
            let y0 = outputs(&path.vertices()[seg], &xs);
            let y1 = outputs(&path.vertices()[seg + 1], &xs);
            let ym = outputs(&path.point(seg, 0.3).unwrap(), &xs);
            for ((a, b), m) in y0.iter().zip(&y1).zip(&ym) {
                assert!((0.7 * a + 0.3 * b - m).abs() < 1e-12, "segment {seg} ({})", path.labels()[seg + 1]);
            }
        }
    }

    #[test]
    fn odd_width_and_mismatch_rejected() {
        let (p, _) = pair(2, 5);
        assert!(build_path_ml(&p, &p).is_err());
        let (a, _) = pair(2, 4);
        let (b, _) = pair(3, 4);
        assert!(build_path_ml(&a, &b).is_err());
    }
}
