use crate::data::{Sample, SampleStream};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::math::DenseMatrix;
use crate::sgd::{check_step_size, SgdSchedule, TracePoint, TrainOutcome};

use super::params::{preactivations, TwoLayerParams};

/// Gradient of the batch-mean loss with respect to (a, w).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient2 {
    pub a: DenseMatrix,
    pub w: DenseMatrix,
}

impl Gradient2 {
    pub fn all_finite(&self) -> bool {
        self.a.all_finite() && self.w.all_finite()
    }
}

/// Returns the gradient of `(1/B) Σ_b ℓ(y_b, ŷ(x_b))` and that loss.
pub fn batch_gradient2(p: &TwoLayerParams, batch: &[Sample], loss: LossKind) -> Result<(Gradient2, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    p.check_input(batch)?;
    for s in batch {
        if s.y.len() != p.out_dim() {
            return Err(Error::shape("two-layer target", p.out_dim(), s.y.len()));
        }
    }
    let (n, d, c) = (p.n(), p.d(), p.out_dim());
    let act = p.activation();
    let u = preactivations(p.w(), batch);
    let mut sig = vec![0.0; u.len()];
    let mut dsig = vec![0.0; u.len()];
    for ((uv, s), ds) in u.iter().zip(&mut sig).zip(&mut dsig) {
        (*s, *ds) = act.apply_with_grad(*uv);
    }

    // Output gradients g_b = ∂ℓ/∂ŷ at every sample.
    let mut g = vec![0.0; batch.len() * c];
    let mut total = 0.0;
    let mut yhat = vec![0.0; c];
    for (b, s) in batch.iter().enumerate() {
        yhat.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let si = sig[b * n + i];
            for (yc, &aic) in yhat.iter_mut().zip(p.a().row(i)) {
                *yc += aic * si;
            }
        }
        for yc in &mut yhat {
            *yc /= n as f64;
        }
        total += loss.value(&s.y, &yhat);
        loss.output_grad(&s.y, &yhat, &mut g[b * c..(b + 1) * c]);
    }

    let scale = 1.0 / (batch.len() as f64 * n as f64);
    let mut ga = DenseMatrix::zeros(n, c);
    let mut gw = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let ai = p.a().row(i);
        let ga_i = ga.row_mut(i);
        let gw_i = gw.row_mut(i);
        for (b, s) in batch.iter().enumerate() {
            let gb = &g[b * c..(b + 1) * c];
            let si = sig[b * n + i];
            let mut back = 0.0;
            for ((gac, &gbc), &aic) in ga_i.iter_mut().zip(gb).zip(ai) {
                *gac += gbc * si;
                back += gbc * aic;
            }
            let coef = back * dsig[b * n + i];
            if coef != 0.0 {
                for (gwk, &xk) in gw_i.iter_mut().zip(&s.x) {
                    *gwk += coef * xk;
                }
            }
        }
    }
    ga.scale(scale);
    gw.scale(scale);
    Ok((Gradient2 { a: ga, w: gw }, total / batch.len() as f64))
}

/// One SGD step in place, `θᵢ ← θᵢ − s·N·∇_{θᵢ} L_batch`. Returns the batch
/// loss before the update. A non-finite gradient leaves `p` untouched.
pub fn sgd_step2(p: &mut TwoLayerParams, batch: &[Sample], step_size: f64, loss: LossKind) -> Result<f64> {
    check_step_size(step_size)?;
    let (grad, l) = batch_gradient2(p, batch, loss)?;
    if !grad.all_finite() || !l.is_finite() {
        return Err(Error::NonFinite { what: "gradient", step: 0 });
    }
    let lr = step_size * p.n() as f64;
    for (v, gv) in p.a_mut().data_mut().iter_mut().zip(grad.a.data()) {
        *v -= lr * gv;
    }
    for (v, gv) in p.w_mut().data_mut().iter_mut().zip(grad.w.data()) {
        *v -= lr * gv;
    }
    Ok(l)
}

/// Runs `sched.steps` SGD steps from `init`, drawing fresh batches from
/// `stream`.
pub fn train2(
    init: &TwoLayerParams,
    stream: &mut dyn SampleStream,
    sched: &SgdSchedule,
    loss: LossKind,
) -> Result<TrainOutcome<TwoLayerParams>> {
    train2_observed(init, stream, sched, loss, |_, _| Ok(()))
}

/// Like [`train2`], calling `observe(k, θ)` with the parameters after `k`
/// steps, for every `k` from 0 to `sched.steps`.
pub fn train2_observed(
    init: &TwoLayerParams,
    stream: &mut dyn SampleStream,
    sched: &SgdSchedule,
    loss: LossKind,
    mut observe: impl FnMut(usize, &TwoLayerParams) -> Result<()>,
) -> Result<TrainOutcome<TwoLayerParams>> {
    sched.validate()?;
    let mut p = init.clone();
    let mut trace = Vec::new();
    let (mut window_sum, mut window_len) = (0.0, 0usize);
    observe(0, &p)?;
    for k in 0..sched.steps {
        let s = sched.step_size(k)?;
        let batch = stream.take_batch(sched.batch)?;
        let l = sgd_step2(&mut p, &batch, s, loss).map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::NonFinite { what, step: k },
            other => other,
        })?;
        window_sum += l;
        window_len += 1;
        let done = k + 1;
        if sched.log_every > 0 && (done % sched.log_every == 0 || done == sched.steps) {
            let mean = window_sum / window_len as f64;
            trace.push(TracePoint { step: done, t: done as f64 * sched.alpha, batch_loss: mean });
            log::debug!("step {done}: mean batch loss {mean:.6}");
            (window_sum, window_len) = (0.0, 0);
        }
        observe(done, &p)?;
    }
    Ok(TrainOutcome { params: p, trace })
}
