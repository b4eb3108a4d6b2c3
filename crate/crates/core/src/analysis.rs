//! End-to-end run: model file → uncertain loop → locus → stability intervals.

use crate::aircraft::UncertainPlant;
use crate::criteria::{
    circle_bounds, exact_bounds, orientation_consistent, popov_bounds, positive_real_bounds, sample_locus,
    small_gain_bounds, CircleCenter, Criterion, LocusOptions, LocusSummary, SlopeSearch, StabilityInterval,
};
use crate::error::{Error, Result};
use crate::lti::{ss_realize, StateSpace, TransferFunction};
use crate::mdelta::MDeltaModel;
use crate::model_file::ModelFile;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub model: ModelFile,
    pub locus: LocusOptions,
    /// Run in [`Criterion::ALL`] order regardless of how they are listed.
    pub criteria: Vec<Criterion>,
    /// Required decay rate for "stable": all eigenvalues satisfy `Re λ < -margin`.
    pub stability_margin: f64,
    pub circle_center: CircleCenter,
    pub slope_search: SlopeSearch,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self::new(ModelFile::default())
    }
}

impl AnalysisSettings {
    pub fn new(model: ModelFile) -> Self {
        Self {
            model,
            locus: LocusOptions::default(),
            criteria: Criterion::ALL.to_vec(),
            stability_margin: 0.0,
            circle_center: CircleCenter::Midpoint,
            slope_search: SlopeSearch::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.locus.validate()?;
        if self.criteria.is_empty() {
            return Err(Error::Invalid("no criteria selected".into()));
        }
        if !(self.stability_margin >= 0.0 && self.stability_margin.is_finite()) {
            return Err(Error::Invalid(format!(
                "stability margin must be a nonnegative number, got {}",
                self.stability_margin
            )));
        }
        Ok(())
    }

    fn ordered_criteria(&self) -> Vec<Criterion> {
        let mut c = self.criteria.clone();
        c.sort();
        c.dedup();
        c
    }
}

/// Every intermediate system of the uncertain feedback loop.
#[derive(Debug, Clone)]
pub struct LoopModel {
    /// Bare aircraft, outputs `[θ, q, α]`.
    pub open_loop: UncertainPlant,
    /// Inner loop closed, output `θ`.
    pub augmented: UncertainPlant,
    /// Elevator command to pitch attitude of the augmented aircraft.
    pub pitch_tf: TransferFunction,
    pub controller_tf: TransferFunction,
    pub controller: StateSpace,
    pub mdelta: MDeltaModel,
}

impl LoopModel {
    pub fn build(model: &ModelFile, margin: f64) -> Result<Self> {
        let open_loop = UncertainPlant::from_aircraft(&model.flight_condition, &model.derivatives())?;
        let augmented = open_loop.stabilized(model.inner_loop.kq, model.inner_loop.kalpha)?;
        let pitch_tf = TransferFunction::from_state_space(&augmented.nominal)?;
        let controller_tf = model.controller.transfer_function()?;
        let controller = ss_realize(&controller_tf)?;
        let mdelta = MDeltaModel::from_loop(&augmented, &controller, margin)?;
        Ok(Self { open_loop, augmented, pitch_tf, controller_tf, controller, mdelta })
    }

    /// The model file followed by every derived matrix, as TOML.
    ///
    /// The derived tables are ignored when the dump is read back as a model.
    pub fn dump_toml(&self, model: &ModelFile) -> String {
        let mut out = model.to_toml();
        let mut derived = toml::Table::new();
        let mut matrices = toml::Table::new();
        let ol = &self.open_loop.nominal;
        for (name, m) in [
            ("A", ol.a()),
            ("B", ol.b()),
            ("C", ol.c()),
            ("D", ol.d()),
            ("Q_A", &self.open_loop.q_a),
            ("Q_B", &self.open_loop.q_b),
            ("A_aug", self.augmented.nominal.a()),
            ("Q_A_aug", &self.augmented.q_a),
            ("H", &self.mdelta.h),
            ("Q", &self.mdelta.qcal),
        ] {
            matrices.insert(name.into(), matrix_value(m));
        }
        derived.insert("matrices".into(), toml::Value::Table(matrices));

        let f = &self.mdelta.factor;
        let mut factor = toml::Table::new();
        factor.insert("sigma".into(), toml::Value::Float(f.sigma));
        factor.insert("v".into(), floats(f.v.iter().copied()));
        factor.insert("w".into(), floats(f.w.iter().copied()));
        derived.insert("rank_one_factor".into(), toml::Value::Table(factor));

        let tf = &self.pitch_tf;
        let mut pitch = toml::Table::new();
        pitch.insert("gain".into(), toml::Value::Float(tf.gain()));
        pitch.insert("zeros".into(), roots_value(tf.zeros()));
        pitch.insert("poles".into(), roots_value(tf.poles()));
        pitch.insert("zpk".into(), toml::Value::String(tf.to_string()));
        derived.insert("pitch_transfer_function".into(), toml::Value::Table(pitch));

        out.push('\n');
        out.push_str(&toml::to_string(&derived).expect("derived tables serialize"));
        out
    }
}

fn floats(it: impl Iterator<Item = f64>) -> toml::Value {
    toml::Value::Array(it.map(toml::Value::Float).collect())
}

fn matrix_value(m: &nalgebra::DMatrix<f64>) -> toml::Value {
    toml::Value::Array(m.row_iter().map(|r| floats(r.iter().copied())).collect())
}

/// Roots as `[re, im]` pairs.
fn roots_value(roots: &[num_complex::Complex64]) -> toml::Value {
    toml::Value::Array(roots.iter().map(|r| floats([r.re, r.im].into_iter())).collect())
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub settings: AnalysisSettings,
    pub loop_model: LoopModel,
    pub summary: LocusSummary,
    /// In report order: exact, small gain, circle, positive real, Popov.
    pub intervals: Vec<StabilityInterval>,
}

impl Analysis {
    pub fn interval(&self, criterion: Criterion) -> Option<&StabilityInterval> {
        self.intervals.iter().find(|i| i.criterion == criterion)
    }
}

/// Builds the loop, samples the locus and evaluates the selected criteria.
///
/// If the crossing-to-Δ mapping disagrees with the eigenvalues of
/// `H + Δ𝒬`, the locus orientation is flipped and the locus resampled.
pub fn run_analysis(settings: &AnalysisSettings) -> Result<Analysis> {
    settings.validate()?;
    let mut loop_model = LoopModel::build(&settings.model, settings.stability_margin)?;
    let mut summary = sample_locus(&loop_model.mdelta.locus_system(), &settings.locus)?;
    if orientation_consistent(&loop_model.mdelta, &summary)? == Some(false) {
        log::warn!("locus orientation inconsistent with the eigenvalue route; flipping");
        loop_model.mdelta.orientation = loop_model.mdelta.orientation.flipped();
        summary = sample_locus(&loop_model.mdelta.locus_system(), &settings.locus)?;
    }

    let mut intervals = Vec::new();
    for c in settings.ordered_criteria() {
        let interval = match c {
            Criterion::Exact => exact_bounds(&loop_model.mdelta, &summary, settings.stability_margin)?,
            Criterion::SmallGain => small_gain_bounds(&summary),
            Criterion::Circle => circle_bounds(&summary, settings.circle_center)?,
            Criterion::PositiveReal => positive_real_bounds(&summary),
            Criterion::Popov => popov_bounds(&summary, settings.slope_search)?,
        };
        log::info!("{}: [{}, {}]", c.label(), interval.lower, interval.upper);
        intervals.push(interval);
    }
    Ok(Analysis { settings: settings.clone(), loop_model, summary, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_run_in_report_order() {
        let mut s = AnalysisSettings::default();
        s.locus.n = 400;
        s.criteria = vec![Criterion::Popov, Criterion::SmallGain, Criterion::Popov];
        let a = run_analysis(&s).unwrap();
        let order: Vec<Criterion> = a.intervals.iter().map(|i| i.criterion).collect();
        assert_eq!(order, vec![Criterion::SmallGain, Criterion::Popov]);
    }

    #[test]
    fn empty_selection_rejected() {
        let mut s = AnalysisSettings::default();
        s.criteria.clear();
        assert!(matches!(run_analysis(&s), Err(Error::Invalid(_))));
    }

    #[test]
    fn dump_reads_back_as_the_same_model() {
        let model = ModelFile::default();
        let lm = LoopModel::build(&model, 0.0).unwrap();
        let dump = lm.dump_toml(&model);
        assert!(dump.contains("[matrices]") && dump.contains("sigma"));
        assert_eq!(ModelFile::parse(&dump).unwrap(), model);
    }

    #[test]
    fn pitch_transfer_function_shape() {
        let lm = LoopModel::build(&ModelFile::default(), 0.0).unwrap();
        assert_eq!(lm.pitch_tf.zeros().len(), 2);
        assert_eq!(lm.pitch_tf.poles().len(), 4);
        assert_eq!(lm.mdelta.n_states(), 8);
    }
}
