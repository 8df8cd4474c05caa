use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use semiframe::atoms::{FamilyFile, TruncationFamily, VectorSystem};
use semiframe::calculus::{optimal_bounds, FrameCalculus};
use semiframe::classify::{self, regularity_order};
use semiframe::continuum::{self, ContinuumFile};
use semiframe::duality::{self, DUAL_TOL};
use semiframe::equivalence::{self, MatrixFile, RankNSystem, RELATION_TOL};
use semiframe::fusion::{self, FusionSystem, CERTIFICATE_SLACK};
use semiframe::random;
use semiframe::scale::{self, CoeffRule, HilbertScale};
use semiframe::FrameError;

use crate::input::{parse_partition, Input};
use crate::{CliError, Command, Common, Outcome, RelationArg};

type Res<T> = std::result::Result<T, CliError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load_inputs(common: &Common) -> Res<Vec<Input>> {
    common.inputs.iter().map(|p| Input::load(p)).collect()
}

fn expect_inputs(inputs: &[Input], range: std::ops::RangeInclusive<usize>, what: &str) -> Res<()> {
    if range.contains(&inputs.len()) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{} expects {}", what, describe(&range))))
    }
}

fn describe(range: &std::ops::RangeInclusive<usize>) -> String {
    if range.start() == range.end() {
        format!("{} --input file(s)", range.start())
    } else {
        format!("{} to {} --input files", range.start(), range.end())
    }
}

fn family(input: &Input, sizes: &Option<Vec<usize>>) -> Res<TruncationFamily> {
    let file: FamilyFile = input.parse()?;
    let fam = TruncationFamily::from_file(&file)?;
    Ok(match sizes {
        Some(s) => fam.with_sizes(s.clone())?,
        None => fam,
    })
}

fn rng(common: &Common) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(common.seed)
}

/// Numerical-domain failures are reported in place instead of aborting.
fn soft<T: Serialize>(r: semiframe::Result<T>) -> Res<Value> {
    match r {
        Ok(v) => Ok(to_value(&v)),
        Err(e) if e.is_numerical() => Ok(json!({ "error": e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

pub fn dispatch(command: &Command) -> Res<Outcome> {
    let common = command.common();
    let inputs = load_inputs(common)?;
    match command {
        Command::Analyze { dual, .. } => analyze(&inputs, *dual),
        Command::Classify { common } => classify(common, &inputs),
        Command::Scale {
            common,
            vector,
            coeffs,
            trials,
        } => scale(common, &inputs, vector.as_deref(), coeffs.as_deref(), *trials),
        Command::Dual {
            common,
            multipliers,
            probes,
        } => dual(common, &inputs, multipliers.as_deref(), *probes),
        Command::Fusion {
            common,
            partition,
            probes,
        } => fusion(common, &inputs, partition.as_deref(), *probes),
        Command::Continuum {
            common,
            m_list,
            refinements,
        } => continuum(common, &inputs, m_list, *refinements),
        Command::Equivalence {
            common,
            relation,
            transform,
            gauge,
            bundle,
        } => equivalence(
            common,
            &inputs,
            *relation,
            transform.as_deref(),
            gauge.as_deref(),
            bundle.as_deref(),
        ),
    }
}

fn analyze(inputs: &[Input], with_dual: bool) -> Res<Outcome> {
    expect_inputs(inputs, 1..=1, "analyze")?;
    let sys: VectorSystem = inputs[0].parse()?;
    let calc = FrameCalculus::new(&sys);
    let bounds = calc.bounds();
    let mut result = json!({
        "dim": sys.dim(),
        "atoms": sys.len(),
        "bounds": bounds,
        "condition": if bounds.lower > 0.0 { Value::from(bounds.upper / bounds.lower) } else { Value::Null },
    });
    if with_dual {
        result["dual"] = to_value(&calc.canonical_dual()?);
    }
    Ok(Outcome {
        config: json!({ "dual": with_dual }),
        tolerances: json!({ "rank_rel": semiframe::linalg::RANK_REL_TOL }),
        result,
    })
}

fn classify(common: &Common, inputs: &[Input]) -> Res<Outcome> {
    expect_inputs(inputs, 1..=1, "classify")?;
    let fam = family(&inputs[0], &common.sizes)?;
    let tau = common.tol.unwrap_or(classify::DEFAULT_TAU);
    let verdict = classify::classify_asymptotic(&fam, tau)?;
    let regularity = soft(regularity_order(&fam, common.n_max))?;
    Ok(Outcome {
        config: json!({ "generator": fam.generator().id(), "family_sizes": fam.sizes() }),
        tolerances: json!({
            "tau": tau,
            "flat_slope": classify::FLAT_SLOPE,
            "trend_slope": classify::TREND_SLOPE,
            "max_fit_residual": classify::MAX_FIT_RESIDUAL,
            "divergence_factor": classify::DIVERGENCE_FACTOR,
        }),
        result: json!({ "verdict": verdict, "regularity": regularity }),
    })
}

fn scale(
    common: &Common,
    inputs: &[Input],
    vector: Option<&std::path::Path>,
    coeffs: Option<&str>,
    trials: usize,
) -> Res<Outcome> {
    expect_inputs(inputs, 1..=2, "scale")?;
    let tol = common.tol.unwrap_or(1e-8);
    let mut rng = rng(common);
    let n_max = common.n_max as i32;

    let sys: VectorSystem = inputs[0].parse()?;
    let hs = HilbertScale::new(&sys, common.n_max)?;
    let f = match vector {
        Some(p) => Input::load(p)?.vector()?,
        None => random::gaussian_vector(&mut rng, sys.dim()),
    };
    if f.len() != sys.dim() {
        return Err(FrameError::DimensionMismatch(format!("vector of length {} in C^{}", f.len(), sys.dim())).into());
    }
    let c = hs.calculus().analysis(&f)?;
    let mut vector_norms = Vec::new();
    let mut coefficient_norms = Vec::new();
    for n in -n_max..=n_max {
        vector_norms.push(json!({ "n": n, "value": soft(hs.norm(&f, n).map(|s| s.value))? }));
        coefficient_norms.push(json!({ "n": n, "value": soft(hs.seq_norm(&c, n).map(|s| s.value))? }));
    }
    let mut defects = Vec::new();
    let mut worst: f64 = 0.0;
    for n in -(n_max - 1)..=(n_max - 1) {
        let d = hs.isometry_defect(n, trials, &mut rng);
        if let Ok(v) = &d {
            worst = worst.max(*v);
        }
        defects.push(json!({ "n": n, "defect": soft(d)? }));
    }

    let probe = match (coeffs, inputs.get(1)) {
        (Some(rule), Some(fam_input)) => {
            let rule: CoeffRule = rule.parse()?;
            let fam = family(fam_input, &common.sizes)?;
            to_value(&scale::end_space_probe(&fam, &rule, common.n_max)?)
        }
        (None, None) => Value::Null,
        _ => return Err(CliError::Usage("the end-space probe needs --coeffs and a second --input family".into())),
    };
    Ok(Outcome {
        config: json!({ "trials": trials, "coeffs": coeffs }),
        tolerances: json!({
            "isometry": tol,
            "range": scale::RANGE_TOL,
            "cauchy_gap": scale::CAUCHY_GAP,
            "min_tail_decay": scale::MIN_TAIL_DECAY,
            "overflow_guard": semiframe::calculus::OVERFLOW_GUARD,
        }),
        result: json!({
            "vector_norms": vector_norms,
            "coefficient_norms": coefficient_norms,
            "isometry_defects": defects,
            "max_isometry_defect": worst,
            "isometric": worst <= tol,
            "end_space": probe,
        }),
    })
}

fn dual(common: &Common, inputs: &[Input], multipliers: Option<&[f64]>, probes: usize) -> Res<Outcome> {
    expect_inputs(inputs, 1..=2, "dual")?;
    let tol = common.tol.unwrap_or(DUAL_TOL);
    let mut rng = rng(common);
    let tolerances = json!({ "dual": tol });
    let pair = |psi: &VectorSystem, phi: &VectorSystem, rng: &mut ChaCha8Rng| -> Res<Value> {
        let mut report = duality::is_dual_pair(psi, phi, probes, rng)?;
        report.is_dual = report.matrix_defect <= tol && report.symmetric_matrix_defect <= tol;
        Ok(to_value(&report))
    };

    if inputs.len() == 2 {
        if inputs[0].has_key("generator") {
            let psi = family(&inputs[0], &common.sizes)?;
            let phi = family(&inputs[1], &common.sizes)?;
            let report = duality::bessel_pair_check(&psi, &phi)?;
            return Ok(Outcome {
                config: json!({ "mode": "bessel_pair" }),
                tolerances,
                result: to_value(&report),
            });
        }
        let psi: VectorSystem = inputs[0].parse()?;
        let phi: VectorSystem = inputs[1].parse()?;
        return Ok(Outcome {
            config: json!({ "mode": "pair", "probes": probes }),
            tolerances,
            result: json!({ "report": pair(&psi, &phi, &mut rng)? }),
        });
    }

    let psi: VectorSystem = inputs[0].parse()?;
    let (mode, dual) = match multipliers {
        Some(m) => {
            let m: Vec<_> = m.iter().map(|&x| semiframe::linalg::c(x, 0.0)).collect();
            ("weighted_shift", duality::weighted_shift_dual(&psi, &m)?)
        }
        None => ("lower", duality::dual_from_lower(&psi)?),
    };
    Ok(Outcome {
        config: json!({ "mode": mode, "probes": probes, "multipliers": multipliers }),
        tolerances,
        result: json!({
            "dual": dual,
            "dual_bounds": optimal_bounds(&dual),
            "report": pair(&psi, &dual, &mut rng)?,
        }),
    })
}

fn fusion(common: &Common, inputs: &[Input], partition: Option<&str>, probes: usize) -> Res<Outcome> {
    expect_inputs(inputs, 1..=2, "fusion")?;
    let mut rng = rng(common);
    let slack = common.tol.unwrap_or(CERTIFICATE_SLACK);
    let tolerances = json!({ "certificate_slack": slack, "orthonormal": fusion::ORTHONORMAL_TOL });

    if inputs[0].has_key("blocks") {
        let fs: FusionSystem = inputs[0].parse()?;
        let mut result = json!({ "bounds": fusion::fusion_operator_bounds(&fs) });
        if let Some(locals) = inputs.get(1) {
            let systems: Vec<VectorSystem> = locals.parse()?;
            let ff = fusion::frame_from_fusion(&fs, &systems, probes, &mut rng)?;
            let holds = ff.observed_max <= ff.certified_bound * (1.0 + slack);
            result["frame"] = json!({
                "system": ff.system,
                "bounds": optimal_bounds(&ff.system),
                "local_upper": ff.local_upper,
                "fusion_upper": ff.fusion_upper,
                "certified_bound": ff.certified_bound,
                "observed_max": ff.observed_max,
                "holds": holds,
            });
        }
        return Ok(Outcome {
            config: json!({ "mode": "fusion_system", "probes": probes }),
            tolerances,
            result,
        });
    }

    expect_inputs(inputs, 1..=1, "fusion of a partitioned frame")?;
    let sys: VectorSystem = inputs[0].parse()?;
    let spec = partition.ok_or_else(|| CliError::Usage("--partition is required for a vector system".into()))?;
    let blocks = parse_partition(spec)?;
    let ff = fusion::fusion_from_frame(&sys, &blocks, probes, &mut rng)?;
    let mut certificate = to_value(&ff.certificate);
    certificate["holds"] = Value::from(ff.certificate.max_violation <= slack);
    Ok(Outcome {
        config: json!({ "mode": "partition", "partition": spec, "probes": probes }),
        tolerances,
        result: json!({
            "fusion": ff.fusion,
            "fusion_bounds": fusion::fusion_operator_bounds(&ff.fusion),
            "local": ff.local,
            "certificate": certificate,
        }),
    })
}

fn continuum(common: &Common, inputs: &[Input], m_list: &[usize], refinements: usize) -> Res<Outcome> {
    expect_inputs(inputs, 1..=1, "continuum")?;
    let tol = common.tol.unwrap_or(1e-3);
    let file: ContinuumFile = inputs[0].parse()?;
    let scf = file.affine()?;
    let spec = continuum::quadrature_frame_operator(&scf);
    let defect = continuum::multiplication_defect(&scf)?;
    let scan = continuum::nonregularity_scan(&scf, m_list, refinements)?;
    Ok(Outcome {
        config: json!({ "m": m_list, "refinements": refinements }),
        tolerances: json!({
            "multiplication": tol,
            "profile_slack": continuum::PROFILE_SLACK,
            "divergence_growth": continuum::DIVERGENCE_GROWTH,
            "convergence_gap": continuum::CONVERGENCE_GAP,
        }),
        result: json!({
            "grid_points": scf.grid().len(),
            "nodes": scf.nodes().len(),
            "bounds": { "lower": spec.lambda_min_nonzero(), "upper": spec.lambda_max(), "rank": spec.rank() },
            "multiplication_defect": defect,
            "multiplication_holds": defect <= tol,
            "scan": scan,
        }),
    })
}

fn matrices(path: Option<&std::path::Path>, flag: &str) -> Res<Vec<semiframe::linalg::CMat>> {
    let path = path.ok_or_else(|| CliError::Usage(format!("--{} is required for this relation", flag)))?;
    let files: Vec<MatrixFile> = Input::load(path)?.parse()?;
    Ok(files.into_iter().map(|m| m.0).collect())
}

fn matrix(path: Option<&std::path::Path>, flag: &str) -> Res<semiframe::linalg::CMat> {
    let path = path.ok_or_else(|| CliError::Usage(format!("--{} is required for this relation", flag)))?;
    let file: MatrixFile = Input::load(path)?.parse()?;
    Ok(file.0)
}

fn equivalence(
    common: &Common,
    inputs: &[Input],
    relation: RelationArg,
    transform: Option<&std::path::Path>,
    gauge: Option<&std::path::Path>,
    bundle: Option<&std::path::Path>,
) -> Res<Outcome> {
    expect_inputs(inputs, 2..=2, "equivalence")?;
    let rs1: RankNSystem = inputs[0].parse()?;
    let rs2: RankNSystem = inputs[1].parse()?;
    let mut report = match relation {
        RelationArg::Similar => equivalence::check_similar(&rs1, &rs2, &matrix(transform, "transform")?)?,
        RelationArg::Gauge => equivalence::check_gauge(&rs1, &rs2, &matrices(gauge, "gauge")?)?,
        RelationArg::Kernel => {
            let t = match transform {
                Some(_) => matrix(transform, "transform")?,
                None => semiframe::linalg::CMat::identity(rs1.dim(), rs1.dim()),
            };
            let u = match gauge {
                Some(_) => matrices(gauge, "gauge")?,
                None => vec![semiframe::linalg::CMat::identity(rs1.rank(), rs1.rank()); rs1.len()],
            };
            equivalence::check_kernel_equivalent(&rs1, &rs2, &t, &u)?
        }
        RelationArg::Bundle => equivalence::check_bundle(&rs1, &rs2, &matrices(bundle, "bundle")?)?,
    };
    if let Some(tol) = common.tol {
        report.pass = report.max_defect <= tol;
        if !report.pass {
            report.downgrade = None;
        }
    }
    Ok(Outcome {
        config: json!({ "relation": report.relation }),
        tolerances: json!({
            "relation": common.tol.unwrap_or(RELATION_TOL),
            "projection": equivalence::PROJECTION_TOL,
            "unitary": equivalence::UNITARY_TOL,
            "constancy": equivalence::CONSTANCY_TOL,
        }),
        result: to_value(&report),
    })
}

