use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nashavg::avt::{embed_avt, uniform_averages, EmbedMode, ScoreMatrix};
use nashavg::hodge::{div, hodge_decompose, logit_matrix, max_abs_curl};
use nashavg::io::{
    center_scores, detect_format, matches_to_counts, matrix_sha256, parse_matches, parse_prob_matrix,
    parse_score_matrix, serialize_report, standardize_scores, Diagnostics, EloBlock, EvaluationReport, HodgeBlock,
    InputFormat, MeloBlock, Mode, NashBlock, Real, SchurBlock,
};
use nashavg::nash::{interpretability_report, maxent_nash_ava_with, maxent_nash_avt_with};
use nashavg::ratings::{elo_fit_batch, empirical_probs, melo_fit_batch, prediction_metrics, EmpiricalProbs, MEloConfig};
use nashavg::schur::schur_antisym;
use nashavg::Error;

use crate::plots::emit_plot_data;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub clamp_eps: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub k: usize,
    pub lr_r: f64,
    pub lr_c: f64,
    pub epochs: usize,
    pub seed: u64,
    pub standardize: bool,
    pub center: bool,
    pub emit_plots: bool,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Solver(String),
    Flags(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Flags(m) => write!(f, "invalid flags: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            Failure::Solver(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Failure::Flags(format!("--tol must be positive, got {}", cfg.tol)));
    }
    if !(cfg.clamp_eps > 0.0 && cfg.clamp_eps < 0.5) {
        return Err(Failure::Flags(format!("--clamp-eps must lie in (0, 0.5), got {}", cfg.clamp_eps)));
    }
    if !(cfg.lr_r > 0.0 && cfg.lr_r.is_finite() && cfg.lr_c >= 0.0 && cfg.lr_c.is_finite()) {
        return Err(Failure::Flags("learning rates must be finite, --lr-r positive".into()));
    }
    if cfg.max_iter == 0 {
        return Err(Failure::Flags("--max-iter must be at least 1".into()));
    }
    let nash = matches!(cfg.subcommand.as_str(), "nash-ava" | "nash-avt");
    if cfg.emit_plots && !nash {
        return Err(Failure::Flags(format!("--emit-plots needs a Nash block; {} does not produce one", cfg.subcommand)));
    }
    if cfg.center && cfg.subcommand == "nash-avt" {
        return Err(Failure::Flags("--center applies to Hodge analyses, not nash-avt".into()));
    }
    if (cfg.standardize || cfg.center) && matches!(cfg.subcommand.as_str(), "elo" | "melo" | "nash-ava") {
        return Err(Failure::Flags(format!("--standardize/--center need score input, not {}", cfg.subcommand)));
    }
    Ok(())
}

enum Data {
    Ava(EmpiricalProbs),
    Avt(ScoreMatrix),
}

fn load(text: &str) -> Result<Data, Failure> {
    Ok(match detect_format(text)? {
        InputFormat::Matches => Data::Ava(empirical_probs(&matches_to_counts(&parse_matches(text)?)?, 0.0)?),
        InputFormat::Probs => Data::Ava(parse_prob_matrix(text)?),
        InputFormat::Scores => Data::Avt(parse_score_matrix(text)?),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    validate(cfg)?;
    let bytes = fs::read(&cfg.input).map_err(|e| Failure::Input(format!("cannot read {}: {e}", cfg.input.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::Input("input is not UTF-8".into()))?;
    let data = load(&text)?;
    let mut diag = Diagnostics::new(&cfg.subcommand, &bytes, cfg.tol, cfg.clamp_eps);
    let (mut report, outcome) = match (cfg.subcommand.as_str(), data) {
        ("elo" | "melo" | "nash-ava", Data::Avt(_)) => {
            return Err(Failure::Input(format!("{} expects matches or a probability table", cfg.subcommand)))
        }
        ("nash-avt", Data::Ava(_)) => return Err(Failure::Input("nash-avt expects a score table".into())),
        (_, Data::Ava(probs)) => {
            diag.shape = vec![probs.len(), probs.len()];
            diag.matrix_sha256 = Some(matrix_sha256(&probs.probs));
            let mut report = EvaluationReport::new(Mode::Ava, probs.labels.clone(), diag);
            let outcome = analyse_ava(cfg, &probs, &mut report);
            (report, outcome)
        }
        (_, Data::Avt(scores)) => report_avt(cfg, scores, diag),
    };
    if let Err(e) = &outcome {
        report.diagnostics.status = "failed".into();
        report.diagnostics.error = Some(e.to_string());
    }
    let text = serialize_report(&report).map_err(|e| Failure::Input(e.to_string()))?;
    write_output(cfg.output.as_deref(), &text)?;
    outcome?;
    if cfg.emit_plots {
        let dir = cfg.output.as_deref().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        emit_plot_data(&report, &dir)?;
    }
    Ok(())
}

fn report_avt(cfg: &RunConfig, scores: ScoreMatrix, mut diag: Diagnostics) -> (EvaluationReport, Result<(), Error>) {
    let mut s = scores;
    if cfg.standardize {
        let (z, warnings) = standardize_scores(&s);
        s = z;
        diag.warnings.extend(warnings);
    }
    if cfg.center {
        s = center_scores(&s);
    }
    diag.shape = vec![s.agents(), s.tasks()];
    diag.matrix_sha256 = Some(matrix_sha256(&s.scores));
    let mut report = EvaluationReport::new(Mode::Avt, s.player_labels(), diag);
    let outcome = analyse_avt(cfg, &s, &mut report);
    (report, outcome)
}

fn hodge_block(a: &nalgebra::DMatrix<f64>, tol: f64) -> Result<HodgeBlock, Error> {
    let parts = hodge_decompose(a);
    let interp = interpretability_report(a, tol)?;
    Ok(HodgeBlock {
        ratings: Real::vec(&parts.ratings.values),
        transitive_norm: Real(parts.transitive.norm()),
        cyclic_norm: Real(parts.cyclic.norm()),
        max_curl: Real(max_abs_curl(a)),
        cyclic: interp.cyclic,
        transitive: interp.transitive,
        maxent_prediction: interp.maxent_prediction.as_ref().map(Real::vec),
        schur: None,
    })
}

fn schur_block(a: &nalgebra::DMatrix<f64>) -> Result<SchurBlock, Error> {
    let f = schur_antisym(a)?;
    Ok(SchurBlock { pairs: Real::slice(&f.pairs), basis: Real::rows(&f.basis) })
}

fn analyse_ava(cfg: &RunConfig, probs: &EmpiricalProbs, report: &mut EvaluationReport) -> Result<(), Error> {
    let clamped = probs.clamped(cfg.clamp_eps)?;
    match cfg.subcommand.as_str() {
        "elo" => {
            let fit = elo_fit_batch(&clamped, cfg.tol, cfg.max_iter)?;
            let m = prediction_metrics(probs, &fit.state.predicted_matrix())?;
            report.diagnostics.iterations = fit.iterations;
            report.diagnostics.residual = Real(fit.residual);
            let r = &fit.state.ratings;
            report.elo = Some(EloBlock {
                ratings: Real::slice(&r.display()),
                ratings_natural: Real::vec(&r.values),
                scale: Real(r.scale),
                iterations: fit.iterations,
                residual: Real(fit.residual),
                frobenius: Real(m.frobenius),
                log_loss: Real(m.log_loss),
            });
        }
        "melo" => {
            let config = MEloConfig {
                k: cfg.k,
                lr_r: cfg.lr_r,
                lr_c: cfg.lr_c,
                epochs: cfg.epochs,
                reorth_every: 1,
                seed: cfg.seed,
            };
            let model = melo_fit_batch(&clamped, &config)?;
            let m = prediction_metrics(probs, &model.predicted_matrix())?;
            report.diagnostics.iterations = cfg.epochs;
            report.melo = Some(MeloBlock {
                k: model.k,
                ratings: Real::slice(&model.ratings.display()),
                ratings_natural: Real::vec(&model.ratings.values),
                cyclic_features: Real::rows(&model.cyclic_features),
                epochs: cfg.epochs,
                seed: cfg.seed,
                frobenius: Real(m.frobenius),
                log_loss: Real(m.log_loss),
            });
        }
        sub => {
            let a = logit_matrix(&probs.probs, cfg.clamp_eps, probs.labels.clone())?.into_entries();
            match sub {
                "hodge" => report.hodge = Some(hodge_block(&a, cfg.tol)?),
                "schur" => {
                    let mut block = hodge_block(&a, cfg.tol)?;
                    block.schur = Some(schur_block(&a)?);
                    report.hodge = Some(block);
                }
                _ => {
                    let eval = maxent_nash_ava_with(&a, cfg.tol, cfg.max_iter)?;
                    report.diagnostics.iterations = eval.iterations;
                    report.diagnostics.residual = Real(eval.residual);
                    report.nash = Some(NashBlock {
                        distribution: Real::vec(&eval.distribution),
                        nash_average: Real::vec(&eval.nash_average),
                        uniform_average: Real::vec(&div(&a)),
                        support: eval.support.iter().map(|&i| probs.labels[i].clone()).collect(),
                        entropy: Real(eval.entropy),
                        exploitability: Real(eval.exploitability),
                        value: None,
                    });
                }
            }
        }
    }
    Ok(())
}

fn analyse_avt(cfg: &RunConfig, s: &ScoreMatrix, report: &mut EvaluationReport) -> Result<(), Error> {
    let labels = s.player_labels();
    match cfg.subcommand.as_str() {
        "hodge" | "schur" => {
            let e = embed_avt(&s.scores, EmbedMode::Hodge);
            let mut block = hodge_block(&e, cfg.tol)?;
            if cfg.subcommand == "schur" {
                block.schur = Some(schur_block(&e)?);
            }
            report.hodge = Some(block);
        }
        _ => {
            let eval = maxent_nash_avt_with(&s.scores, cfg.tol, cfg.max_iter)?;
            let avg = uniform_averages(&s.scores);
            let cat = |a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>| {
                a.iter().chain(b.iter()).map(|&x| Real(x)).collect::<Vec<_>>()
            };
            let m = s.agents();
            let support = eval
                .agent_support
                .iter()
                .copied()
                .chain(eval.task_support.iter().map(|&j| j + m))
                .map(|i| labels[i].clone())
                .collect();
            report.diagnostics.iterations = eval.iterations;
            report.diagnostics.residual = Real(eval.residual);
            report.nash = Some(NashBlock {
                distribution: cat(&eval.agent_distribution, &eval.task_distribution),
                nash_average: cat(&eval.agent_nash_avg, &eval.task_nash_avg),
                uniform_average: cat(&avg.skill, &avg.difficulty),
                support,
                entropy: Real(eval.agent_entropy + eval.task_entropy),
                exploitability: Real(eval.exploitability),
                value: Some(Real(eval.value)),
            });
        }
    }
    Ok(())
}
