//! Uncertain closed loop `H + Δ𝒬` and its M-Δ form.
//!
//! For a rank-1 `𝒬 = σ v wᵀ` the eigenvalues of `H + δ𝒬` are the closed-loop
//! poles of the SISO system `M = (H, σv, wᵀ, 0)` under `u = δ y`. The
//! graphical criteria use the negative-feedback orientation, where the locus
//! of `-M(jω)` crossing the real axis at `x` corresponds to `Δ = -1/x`.

use nalgebra::{DMatrix, DVector};

use crate::aircraft::UncertainPlant;
use crate::error::{Error, Result};
use crate::lti::{feedback_unity, is_hurwitz, series, spectral_abscissa, StateSpace};

/// Largest admissible `σ₂/σ₁` for a perturbation treated as rank 1.
pub const RANK_ONE_TOL: f64 = 1e-8;

/// `H` and `𝒬` of the uncertain closed loop.
///
/// `H` is negative unity feedback around `plant ∘ controller`; `𝒬` is
/// `[[Q_A - Q_B D_k C_p, Q_B C_k], [0, 0]]`.
pub fn closed_loop_uncertain(plant: &UncertainPlant, controller: &StateSpace) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let p = &plant.nominal;
    if !p.is_siso() || !controller.is_siso() {
        return Err(Error::Dimension("closed loop needs a SISO plant and controller".into()));
    }
    if !p.is_strictly_proper() {
        return Err(Error::Unsupported("plant must be strictly proper (D_p = 0)".into()));
    }
    if plant.q_a.shape() != p.a().shape() || plant.q_b.shape() != p.b().shape() {
        return Err(Error::Dimension("perturbation matrices do not match the plant".into()));
    }
    let h = feedback_unity(&series(p, controller)?)?.a().clone();

    let (np, nk) = (p.n_states(), controller.n_states());
    let mut q = DMatrix::zeros(np + nk, np + nk);
    let top_left = &plant.q_a - &plant.q_b * controller.d() * p.c();
    q.view_mut((0, 0), (np, np)).copy_from(&top_left);
    q.view_mut((0, np), (np, nk)).copy_from(&(&plant.q_b * controller.c()));
    Ok((h, q))
}

/// `𝒬 = σ v wᵀ` with unit `v`, `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneFactor {
    pub sigma: f64,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

impl RankOneFactor {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.v * self.w.transpose() * self.sigma
    }
}

/// Leading singular triple of `𝒬`.
///
/// The first entry of `v` that is not negligible is made positive; the sign is
/// carried by `w`. A zero matrix factors as `σ = 0` with `v = w = e₁`.
pub fn rank_one_factor(q: &DMatrix<f64>) -> Result<RankOneFactor> {
    let n = q.nrows();
    if q.ncols() != n || n == 0 {
        return Err(Error::Dimension(format!("perturbation must be square and nonempty, got {}x{}", n, q.ncols())));
    }
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("perturbation has non-finite entries".into()));
    }
    let e1 = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    if q.iter().all(|&x| x == 0.0) {
        return Ok(RankOneFactor { sigma: 0.0, v: e1.clone(), w: e1 });
    }
    let svd = q.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (i1, &s1) = sv.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let s2 = sv.iter().enumerate().filter(|(i, _)| *i != i1).map(|(_, s)| *s).fold(0.0, f64::max);
    let ratio = s2 / s1;
    if ratio >= RANK_ONE_TOL {
        return Err(Error::UnsupportedRank { ratio });
    }
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut v: DVector<f64> = u.column(i1).into_owned();
    let mut w: DVector<f64> = vt.row(i1).transpose().into_owned();
    v /= v.norm();
    w /= w.norm();
    let vmax = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * vmax) {
        if first < 0.0 {
            v.neg_mut();
            w.neg_mut();
        }
    }
    Ok(RankOneFactor { sigma: s1, v, w })
}

/// Sign relating the analysed locus to `M = (H, σv, wᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Locus of `-M`: `H + Δ𝒬` is the loop closed by `u = -Δ y`.
    NegativeFeedback,
    /// Locus of `M` itself: `H + Δ𝒬` is the loop closed by `u = Δ y`.
    PositiveFeedback,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::NegativeFeedback => -1.0,
            Orientation::PositiveFeedback => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::NegativeFeedback => Orientation::PositiveFeedback,
            Orientation::PositiveFeedback => Orientation::NegativeFeedback,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MDeltaModel {
    pub h: DMatrix<f64>,
    pub qcal: DMatrix<f64>,
    pub factor: RankOneFactor,
    pub orientation: Orientation,
    m: StateSpace,
}

impl MDeltaModel {
    /// Factors `𝒬` and checks that the nominal loop `H` is Hurwitz.
    pub fn new(h: DMatrix<f64>, qcal: DMatrix<f64>, margin: f64) -> Result<Self> {
        if h.shape() != qcal.shape() {
            return Err(Error::Dimension("H and 𝒬 must have the same shape".into()));
        }
        if !is_hurwitz(&h, margin)? {
            return Err(Error::NotHurwitz {
                max_real: spectral_abscissa(&h)?,
                context: "nominal closed loop H".into(),
            });
        }
        let factor = rank_one_factor(&qcal)?;
        let m = StateSpace::new(
            h.clone(),
            DMatrix::from_column_slice(h.nrows(), 1, (&factor.v * factor.sigma).as_slice()),
            DMatrix::from_row_slice(1, h.nrows(), factor.w.as_slice()),
            DMatrix::zeros(1, 1),
        )?;
        Ok(Self { h, qcal, factor, orientation: Orientation::NegativeFeedback, m })
    }

    /// Closes `controller` around the uncertain plant.
    pub fn from_loop(plant: &UncertainPlant, controller: &StateSpace, margin: f64) -> Result<Self> {
        let (h, q) = closed_loop_uncertain(plant, controller)?;
        Self::new(h, q, margin)
    }

    /// `M = (H, σv, wᵀ, 0)`; `u = δ y` reproduces `H + δ𝒬`.
    pub fn m_transfer(&self) -> &StateSpace {
        &self.m
    }

    /// The fixed part whose locus the graphical criteria read, per [`Orientation`].
    pub fn locus_system(&self) -> StateSpace {
        let mut sys = StateSpace::new(
            self.m.a().clone(),
            self.m.b().clone(),
            self.m.c() * self.orientation.sign(),
            self.m.d().clone(),
        )
        .expect("dimensions copied from a valid system");
        sys.output_names = vec!["y".into()];
        sys
    }

    pub fn perturbed(&self, delta: f64) -> DMatrix<f64> {
        &self.h + &self.qcal * delta
    }

    /// `M` closed under `u = δ y`: `H + σ v δ wᵀ`.
    pub fn loop_closure(&self, delta: f64) -> DMatrix<f64> {
        self.m.a() + self.m.b() * delta * self.m.c()
    }

    pub fn is_stable_at(&self, delta: f64, margin: f64) -> Result<bool> {
        is_hurwitz(&self.perturbed(delta), margin)
    }

    pub fn n_states(&self) -> usize {
        self.h.nrows()
    }
}
