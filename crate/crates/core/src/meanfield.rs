//! Ideal-particle (mean-field limit) dynamics of the two-layer network,
//! integrated with forward Euler over an empirical particle measure.

use crate::data::{LabeledDataset, Sample, SampleStream};
use crate::error::{Error, Result};
use crate::math::{Activation, DenseMatrix};
use crate::sgd::Xi;
use crate::two_layer::TwoLayerParams;

/// `M` particles `θ̄ᵢ = (aᵢ, wᵢ)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub a: DenseMatrix,
    pub w: DenseMatrix,
    pub activation: Activation,
    pub t: f64,
}

impl ParticleEnsemble {
    pub fn from_params(p: &TwoLayerParams) -> Self {
        Self { a: p.a().clone(), w: p.w().clone(), activation: p.activation(), t: 0.0 }
    }

    pub fn to_params(&self) -> Result<TwoLayerParams> {
        TwoLayerParams::new(self.a.clone(), self.w.clone(), self.activation)
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.a.cols()
    }

    /// The first `k` particles as an ensemble of their own.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.m() {
            return Err(Error::InvalidArgument(format!("prefix of {k} particles out of {}", self.m())));
        }
        let idx: Vec<usize> = (0..k).collect();
        Ok(Self { a: self.a.select_rows(&idx), w: self.w.select_rows(&idx), activation: self.activation, t: self.t })
    }

    fn validate(&self) -> Result<()> {
        if self.a.rows() != self.w.rows() || self.a.rows() == 0 {
            return Err(Error::shape("particle ensemble", format!("{} particles", self.w.rows()), self.a.rows()));
        }
        if !(self.t >= 0.0) {
            return Err(Error::InvalidArgument(format!("ensemble time must be nonnegative, got {}", self.t)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub dt: f64,
    /// Horizon `T`; the integrator takes `round(T/dt)` steps.
    pub horizon: f64,
    /// Samples per Monte-Carlo estimate of the data expectation.
    pub mc_batch: usize,
    pub xi: Xi,
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be nonnegative, got {}", self.horizon)));
        }
        if self.mc_batch == 0 {
            return Err(Error::InvalidArgument("mc_batch must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One Euler step with the data expectation replaced by the average over
/// `batch`:
/// `θ̄ᵢ += h · 2 · avg_b ∇σ⋆(x_b, θ̄ᵢ) · (y_b − (1/M) Σⱼ σ⋆(x_b, θ̄ⱼ))`.
fn euler_step(ens: &ParticleEnsemble, batch: &[Sample], h: f64) -> Result<ParticleEnsemble> {
    let (m, d, c) = (ens.m(), ens.d(), ens.out_dim());
    let act = ens.activation;
    // Residual of the ensemble-mean predictor at every sample.
    let mut resid = Vec::with_capacity(batch.len());
    let mut feats = Vec::with_capacity(batch.len());
    for s in batch {
        if s.x.len() != d || s.y.len() != c {
            return Err(Error::shape("oracle sample", format!("x: {d}, y: {c}"), format!("x: {}, y: {}", s.x.len(), s.y.len())));
        }
        let mut mean = vec![0.0; c];
        let mut uv = Vec::with_capacity(m);
        for i in 0..m {
            let mut u = 0.0;
            for (wk, xk) in ens.w.row(i).iter().zip(&s.x) {
                u += wk * xk;
            }
            let (sv, dv) = act.apply_with_grad(u);
            for (mc, ac) in mean.iter_mut().zip(ens.a.row(i)) {
                *mc += ac * sv;
            }
            uv.push((sv, dv));
        }
        resid.push(s.y.iter().zip(&mean).map(|(y, mv)| y - mv / m as f64).collect::<Vec<f64>>());
        feats.push(uv);
    }

    let scale = 2.0 * h / batch.len() as f64;
    let mut next = ens.clone();
    for i in 0..m {
        let mut da = vec![0.0; c];
        let mut dw = vec![0.0; d];
        for (b, s) in batch.iter().enumerate() {
            let (sv, dv) = feats[b][i];
            let r = &resid[b];
            let mut ra = 0.0;
            for ((dac, rc), ac) in da.iter_mut().zip(r).zip(ens.a.row(i)) {
                *dac += rc * sv;
                ra += rc * ac;
            }
            let coef = ra * dv;
            for (dwk, xk) in dw.iter_mut().zip(&s.x) {
                *dwk += coef * xk;
            }
        }
        for (v, dv) in next.a.row_mut(i).iter_mut().zip(&da) {
            *v += scale * dv;
        }
        for (v, dv) in next.w.row_mut(i).iter_mut().zip(&dw) {
            *v += scale * dv;
        }
    }
    if !next.a.all_finite() || !next.w.all_finite() {
        return Err(Error::NonFinite { what: "ideal-particle update", step: 0 });
    }
    Ok(next)
}

fn integrate_with(
    ens: &ParticleEnsemble,
    cfg: &OracleConfig,
    mut batch_for_step: impl FnMut() -> Result<Vec<Sample>>,
) -> Result<ParticleEnsemble> {
    cfg.validate()?;
    ens.validate()?;
    let t0 = ens.t;
    let mut cur = ens.clone();
    for k in 0..cfg.steps() {
        let t = t0 + k as f64 * cfg.dt;
        let xi = cfg.xi.at(t);
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("xi({t}) = {xi} is not positive")));
        }
        let batch = batch_for_step()?;
        cur = euler_step(&cur, &batch, cfg.dt * xi).map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::NonFinite { what, step: k },
            other => other,
        })?;
        cur.t = t0 + (k + 1) as f64 * cfg.dt;
    }
    Ok(cur)
}

/// Integrates up to `ens.t + cfg.horizon`, drawing a fresh batch of
/// `cfg.mc_batch` samples from `data` at every step.
pub fn integrate_ideal(ens: &ParticleEnsemble, data: &mut dyn SampleStream, cfg: &OracleConfig) -> Result<ParticleEnsemble> {
    integrate_with(ens, cfg, || data.take_batch(cfg.mc_batch))
}

/// Integrates with the expectation taken exactly over a fixed dataset at
/// every step (`cfg.mc_batch` is ignored).
pub fn integrate_ideal_fixed(ens: &ParticleEnsemble, ds: &LabeledDataset, cfg: &OracleConfig) -> Result<ParticleEnsemble> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    integrate_with(ens, cfg, || Ok(ds.samples().to_vec()))
}

/// Limit loss of the empirical measure: mean over `ds` of
/// `‖y − (1/M) Σᵢ aᵢ σ(⟨x, wᵢ⟩)‖²`.
pub fn limit_loss(ens: &ParticleEnsemble, ds: &LabeledDataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.d() != ens.d() || ds.out_dim() != ens.out_dim() {
        return Err(Error::shape("limit loss dataset", format!("d = {}, out = {}", ens.d(), ens.out_dim()), format!("d = {}, out = {}", ds.d(), ds.out_dim())));
    }
    let m = ens.m() as f64;
    let mut total = 0.0;
    for s in ds.samples() {
        let mut pred = vec![0.0; ens.out_dim()];
        for i in 0..ens.m() {
            let mut u = 0.0;
            for k in 0..ens.d() {
                u += ens.w.get(i, k) * s.x[k];
            }
            let sv = ens.activation.apply(u);
            for (c, p) in pred.iter_mut().enumerate() {
                *p += ens.a.get(i, c) * sv;
            }
        }
        for (y, p) in s.y.iter().zip(&pred) {
            let r = y - p / m;
            total += r * r;
        }
    }
    Ok(total / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{GaussianTaskSpec, VecStream};
    use crate::loss::LossKind;
    use crate::model::empirical_loss;
    use crate::two_layer::{sgd_step2, TwoLayerInit};

    fn dataset(n: usize, seed: u64) -> LabeledDataset {
        let spec = GaussianTaskSpec { d: 3, delta: 0.5, seed };
        LabeledDataset::from_stream(&mut spec.stream().unwrap(), n, 2).unwrap().with_bias()
    }

    fn ensemble(m: usize, seed: u64) -> ParticleEnsemble {
        ParticleEnsemble::from_params(&TwoLayerParams::init(m, 4, 1, Activation::Sigmoid, &TwoLayerInit::default(), seed).unwrap())
    }

    fn cfg(dt: f64, horizon: f64) -> OracleConfig {
        OracleConfig { dt, horizon, mc_batch: 10, xi: Xi::default() }
    }

    #[test]
    fn zero_horizon_is_identity() {
        let e = ensemble(5, 1);
        let mut s = VecStream::new(vec![]);
        assert_eq!(integrate_ideal(&e, &mut s, &cfg(0.1, 0.0)).unwrap(), e);
    }

    #[test]
    fn perfect_fit_has_no_drift() {
        let e = ensemble(6, 2);
        let p = e.to_params().unwrap();
        let ds = dataset(30, 3);
        let fitted = ds
            .map(|s| Sample::new(s.x.clone(), crate::model::Network::predict(&p, &s.x).unwrap()))
            .unwrap();
        let out = integrate_ideal_fixed(&e, &fitted, &cfg(0.05, 1.0)).unwrap();
        assert!(out.a.max_abs_diff(&e.a) < 1e-12 && out.w.max_abs_diff(&e.w) < 1e-12);
    }

    #[test]
    fn limit_loss_matches_network_loss() {
        let e = ensemble(7, 4);
        let ds = dataset(50, 5);
        let direct = empirical_loss(&e.to_params().unwrap(), &ds, LossKind::Square).unwrap();
        assert!((limit_loss(&e, &ds).unwrap() - direct).abs() < 1e-12);
        let mut z = e.clone();
        z.a.scale(0.0);
        let zeros = ds.map(|s| Sample::new(s.x.clone(), vec![0.0])).unwrap();
        assert_eq!(limit_loss(&z, &zeros).unwrap(), 0.0);
    }

    #[test]
    fn single_particle_matches_full_batch_gd() {
        let e = ensemble(1, 6);
        let ds = dataset(40, 7);
        let mut p = e.to_params().unwrap();
        let dt = 0.05;
        let mut cur = e.clone();
        for _ in 0..100 {
            cur = integrate_ideal_fixed(&cur, &ds, &cfg(dt, dt)).unwrap();
            sgd_step2(&mut p, ds.samples(), dt, LossKind::Square).unwrap();
        }
        assert!(cur.a.max_abs_diff(p.a()) < 1e-10);
        assert!(cur.w.max_abs_diff(p.w()) < 1e-10);
        assert!((cur.t - 5.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_equivariant() {
        let e = ensemble(4, 8);
        let ds = dataset(20, 9);
        let order = [2, 0, 3, 1];
        let mut perm = e.clone();
        perm.a = e.a.select_rows(&order);
        perm.w = e.w.select_rows(&order);
        let c = cfg(0.1, 1.0);
        let out = integrate_ideal_fixed(&e, &ds, &c).unwrap();
        let out_p = integrate_ideal_fixed(&perm, &ds, &c).unwrap();
        assert!(out_p.a.max_abs_diff(&out.a.select_rows(&order)) < 1e-12);
        assert!(out_p.w.max_abs_diff(&out.w.select_rows(&order)) < 1e-12);
    }

    #[test]
    fn output_weights_grow_at_most_linearly() {
        let e = ensemble(20, 10);
        let spec = GaussianTaskSpec { d: 3, delta: 0.5, seed: 11 };
        let mut stream = crate::data::MapStream::new(spec.stream().unwrap(), |s: Sample| s.with_bias());
        let horizon = 5.0;
        let out = integrate_ideal(&e, &mut stream, &OracleConfig { dt: 0.05, horizon, mc_batch: 20, xi: Xi::default() }).unwrap();
        let a0 = e.a.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let a1 = out.a.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // |y − ŷ| ≤ 1 + max|a| and σ ≤ 1 give |ȧ| ≤ 2(1 + max|a|); slack 10.
        assert!(a1 <= 10.0 * (a0 + 1.0) * (1.0 + horizon), "{a1}");
    }

    #[test]
    fn bad_config_rejected() {
        let e = ensemble(2, 1);
        let ds = dataset(5, 1);
        assert!(integrate_ideal_fixed(&e, &ds, &cfg(0.0, 1.0)).is_err());
        assert!(integrate_ideal_fixed(&e, &ds, &OracleConfig { dt: 0.1, horizon: 1.0, mc_batch: 0, xi: Xi::default() }).is_err());
    }
}
