//! Implementations of the `finv` commands. Each command parses a config
//! document, runs its computation, and returns both a human rendering and
//! a machine-readable JSON value. Exit status is decided by the caller:
//! 0 when everything passed, 1 when a verification check failed, 2 on
//! input errors.

use crate::cayley::Side;
use crate::config::{self, Measure};
use crate::entropy::{big_f, f_limit, f_markov, GenSet, MeasureRef};
use crate::report::{
    rescale_bits, render_entropy, EntropyDocument, VerificationReport,
};
use crate::sample;
use crate::subgroup::{
    check_comb_identity, check_subedge_identity, kps_scaling, schreier_transversal,
};
use crate::transform::{empirical_pairs, markov_approx, restrict_finite, restrict_markov};
use crate::word::Word;
use crate::{Error, Result};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Fixed default seed for the randomized suites.
pub const DEFAULT_SEED: u64 = 1729;
/// Default relative tolerance for cross-route equalities.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Command-line overrides; any set field wins over the config's options
/// block.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub log2: bool,
    pub rank: Option<usize>,
    pub radius: Option<usize>,
    pub count: Option<usize>,
}

/// What a command hands back to `main`.
pub struct CommandOutput {
    pub human: String,
    pub json: serde_json::Value,
    pub all_pass: bool,
}

fn config_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Settings {
    n_max: Option<usize>,
    tol: f64,
    seed: u64,
    log2: bool,
    rank: usize,
    radius: usize,
    count: usize,
}

fn merge(opts: &config::Options, flags: &Flags) -> Settings {
    Settings {
        n_max: flags.n_max.or(opts.n_max),
        tol: flags.tol.or(opts.tol).unwrap_or(DEFAULT_TOL),
        seed: flags.seed.or(opts.seed).unwrap_or(DEFAULT_SEED),
        log2: flags.log2 || opts.log2,
        rank: flags.rank.or(opts.rank).unwrap_or(2),
        radius: flags.radius.or(opts.radius).unwrap_or(2),
        count: flags.count.or(opts.count).unwrap_or(50),
    }
}

fn entropy_report(measure: &Measure, n_max: Option<usize>) -> Result<crate::entropy::EntropyReport> {
    match measure {
        Measure::Markov(tm) => f_limit(
            MeasureRef::Markov(tm),
            &GenSet::letters(tm.rank()),
            n_max.unwrap_or(1),
        ),
        Measure::Finite(fa) => f_limit(
            MeasureRef::Finite(fa),
            &GenSet::letters(fa.rank()),
            n_max.unwrap_or(16),
        ),
    }
}

/// `finv entropy`: the entropy of the configured measure, with the
/// per-generator breakdown and the ball sequence.
pub fn cmd_entropy(config_text: &str, flags: &Flags) -> Result<CommandOutput> {
    let doc = config::parse(config_text)?;
    let settings = merge(&config::read_options(&doc)?, flags);
    let measure = config::single_measure(&doc)?;
    let report = entropy_report(&measure, settings.n_max)?;
    let display = if settings.log2 { rescale_bits(&report) } else { report };
    let envelope = EntropyDocument {
        command: "entropy".into(),
        config_hash: config_hash(config_text),
        log_base: if settings.log2 { "bits".into() } else { "nats".into() },
        report: display,
    };
    Ok(CommandOutput {
        human: render_entropy(&envelope),
        json: serde_json::to_value(&envelope).expect("report serializes"),
        all_pass: true,
    })
}

/// `finv verify-subgroup`: restrict the measure to the configured
/// finite-index subgroup and check f_H = index * f_G, plus the rank
/// formula for the Schreier generators.
pub fn cmd_verify_subgroup(config_text: &str, flags: &Flags) -> Result<CommandOutput> {
    let doc = config::parse(config_text)?;
    let settings = merge(&config::read_options(&doc)?, flags);
    let measure = config::single_measure(&doc)?;
    let act = match doc.block("coset_action") {
        Some(b) => config::build_coset_action(b)?,
        None => return Err(Error::Config("missing coset_action block".into())),
    };
    if act.rank() != measure.rank() {
        return Err(Error::RankMismatch(measure.rank(), act.rank()));
    }
    let td = schreier_transversal(&act);
    let index = act.index();
    let rank = act.rank();

    let mut report = VerificationReport::new(
        "verify-subgroup",
        config_hash(config_text),
        settings.seed,
    );
    report.push_exact(
        "schreier generator count".into(),
        "|T| = n(r-1)+1",
        td.gens.len().to_string(),
        (index * (rank - 1) + 1).to_string(),
        td.gens.len() == index * (rank - 1) + 1,
    );

    let mut detail = String::new();
    let (f_g, f_h) = match &measure {
        Measure::Markov(tm) => {
            let restricted = restrict_markov(tm, &act, &td)?;
            detail.push_str(&format!(
                "  restricted alphabet: {} patterns on {}\n",
                restricted.legend.patterns.len(),
                td.delta_set()
            ));
            (f_markov(tm), f_markov(&restricted.measure))
        }
        Measure::Finite(fa) => {
            let n_max = settings.n_max.unwrap_or(16);
            let down = f_limit(MeasureRef::Finite(fa), &GenSet::letters(rank), n_max)?;
            let restricted = restrict_finite(fa, &act, &td)?;
            let up = f_limit(
                MeasureRef::Finite(&restricted),
                &GenSet::letters(restricted.rank()),
                n_max,
            )?;
            report.push_exact(
                "ball sequences stabilized".into(),
                "join partitions stop refining",
                down.stabilized.to_string(),
                up.stabilized.to_string(),
                down.stabilized && up.stabilized,
            );
            (down.value, up.value)
        }
    };
    let tol = settings.tol * (1.0 + f_g.abs());
    report.push_numeric(
        "subgroup formula".into(),
        "f_H = |G:H| * f_G",
        f_h,
        index as f64 * f_g,
        tol,
    );

    let delta_words: Vec<String> = td.delta.iter().map(Word::to_string).collect();
    let gen_words: Vec<String> = td.gens.iter().map(Word::to_string).collect();
    let scale = if settings.log2 { std::f64::consts::LN_2 } else { 1.0 };
    let mut human = report.render_human();
    human.push_str(&format!(
        "  index {index}, |T| = {}\n  transversal: {}\n  generators: {}\n  f_G = {:.10}, f_H = {:.10}\n",
        td.gens.len(),
        delta_words.join(", "),
        gen_words.join(", "),
        f_g / scale,
        f_h / scale,
    ));
    human.push_str(&detail);
    let all_pass = report.all_pass();
    Ok(CommandOutput {
        human,
        json: serde_json::to_value(&report).expect("report serializes"),
        all_pass,
    })
}

/// `finv verify-identities`: the exact combinatorial identities over
/// seeded random instances — ball counts over left-connected sets,
/// the bi-connected set identity, the transversal edge-count identity,
/// and the Schreier rank formula.
pub fn cmd_verify_identities(config_text: &str, flags: &Flags) -> Result<CommandOutput> {
    let doc = config::parse(config_text)?;
    let settings = merge(&config::read_options(&doc)?, flags);
    if !(2..=3).contains(&settings.rank) {
        return Err(Error::Config(format!(
            "rank {} out of the supported range 2..=3",
            settings.rank
        )));
    }
    if settings.radius > 4 {
        return Err(Error::Config(format!(
            "radius {} exceeds the supported bound 4",
            settings.radius
        )));
    }
    let rank = settings.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut report = VerificationReport::new(
        "verify-identities",
        config_hash(config_text),
        settings.seed,
    );
    let within = crate::cayley::ball(rank, settings.radius);
    for i in 0..settings.count {
        let size = rng.gen_range(1..=8);
        let k = sample::random_connected_set(&mut rng, rank, size, Side::Left, Some(&within));
        let ball_rep = crate::entropy::check_ball_identity(&k)?;
        report.push_exact(
            format!("ball identity #{i} ({})", k),
            "1 = (1-2r)|K| + sum_s |sK u K|",
            ball_rep.lhs.to_string(),
            ball_rep.rhs.to_string(),
            ball_rep.holds,
        );

        let delta_size = rng.gen_range(1..=6);
        let delta = sample::random_bi_connected_set(&mut rng, rank, delta_size);
        let comb = check_comb_identity(&delta)?;
        report.push_exact(
            format!("bi-connected identity #{i} ({})", delta),
            "n*sum_s(R(sD u D)-R(D)) = sum_s(R(Ds u D)-R(D)) + (n(r-1)+1)R(D)",
            comb.main_lhs.to_string(),
            comb.main_rhs.to_string(),
            comb.holds,
        );

        let index = rng.gen_range(1..=6);
        let act = sample::random_transitive_action(&mut rng, rank, index);
        let td = schreier_transversal(&act);
        let sub = check_subedge_identity(&td);
        report.push_exact(
            format!("transversal edge identity #{i} (index {index})"),
            "sum_t(R(tD u D)-R(D)) = |T|R(D) + sum_s(R(Ds u D)-R(D))",
            sub.lhs.to_string(),
            sub.rhs.to_string(),
            sub.holds,
        );
        report.push_exact(
            format!("rank formula #{i} (index {index})"),
            "|T| = n(r-1)+1",
            td.gens.len().to_string(),
            (index * (rank - 1) + 1).to_string(),
            td.gens.len() == index * (rank - 1) + 1,
        );
    }
    let all_pass = report.all_pass();
    Ok(CommandOutput {
        human: report.render_human(),
        json: serde_json::to_value(&report).expect("report serializes"),
        all_pass,
    })
}

/// `finv approx`: the Markov measure with the same pair marginals as the
/// configured measure, plus the check that the base functional is
/// unchanged.
pub fn cmd_approx(config_text: &str, flags: &Flags) -> Result<CommandOutput> {
    let doc = config::parse(config_text)?;
    let settings = merge(&config::read_options(&doc)?, flags);
    let measure = config::single_measure(&doc)?;
    let (pi, joints) = empirical_pairs(measure.as_ref());
    let approx = markov_approx(&pi, &joints)?;

    let mut report =
        VerificationReport::new("approx", config_hash(config_text), settings.seed);
    let rank = measure.rank();
    let base = crate::cayley::WordSet::singleton(Word::identity(rank));
    let direct = big_f(measure.as_ref(), &GenSet::letters(rank), &base)?;
    report.push_numeric(
        "functional preserved".into(),
        "F(mu', alpha) = F(mu, alpha)",
        f_markov(&approx),
        direct.value,
        1e-12,
    );
    let mut max_dev: f64 = 0.0;
    for (s, joint) in joints.iter().enumerate() {
        let mat = approx.transition(s + 1);
        for (a, row) in joint.iter().enumerate() {
            for (b, &j) in row.iter().enumerate() {
                max_dev = max_dev.max((approx.pi()[a] * mat[a][b] - j).abs());
            }
        }
    }
    report.push_numeric(
        "pair marginals reproduced".into(),
        "mu'(A intersect s A') = mu(A intersect s A')",
        max_dev,
        0.0,
        1e-12,
    );

    let emitted = config::emit_markov(&approx);
    let mut human = report.render_human();
    human.push('\n');
    human.push_str(&emitted);
    let all_pass = report.all_pass();
    Ok(CommandOutput {
        human,
        json: serde_json::json!({
            "report": report,
            "measure_config": emitted,
        }),
        all_pass,
    })
}

/// Output document of `finv vf`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VfDocument {
    pub command: String,
    pub config_hash: String,
    pub log_base: String,
    pub f_subgroup: f64,
    pub rank_subgroup: usize,
    pub scaling: f64,
    pub vf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_ambient: Option<f64>,
}

/// `finv vf`: entropy of a virtually free group action, computed from a
/// measure over a finite-index free subgroup and divided by rank-1 —
/// either directly or through the edge/vertex group orders of a graph of
/// finite groups.
pub fn cmd_vf(config_text: &str, flags: &Flags) -> Result<CommandOutput> {
    let doc = config::parse(config_text)?;
    let settings = merge(&config::read_options(&doc)?, flags);
    let opts = config::read_options(&doc)?;
    let measure = config::single_measure(&doc)?;
    let rank_g = measure.rank();
    if let Some(declared) = opts.rank_g {
        if declared != rank_g {
            return Err(Error::Config(format!(
                "rank_g = {declared} disagrees with the measure's rank {rank_g}"
            )));
        }
    }
    if rank_g < 2 {
        return Err(Error::Config(
            "rank-1 subgroup: the action is virtually cyclic, scaling undefined".into(),
        ));
    }
    let report = entropy_report(&measure, settings.n_max)?;
    let f_g = report.value;

    let mut chi_str = None;
    let mut index = None;
    let mut f_ambient = None;
    let scaling;
    if let Some(kps) = doc.block("kps") {
        let edges: Vec<u64> = kps
            .usize_array("edges")
            .unwrap_or_default()
            .into_iter()
            .map(|x| x as u64)
            .collect();
        let vertices: Vec<u64> = kps
            .usize_array("vertices")?
            .into_iter()
            .map(|x| x as u64)
            .collect();
        if edges.iter().chain(&vertices).any(|&x| x == 0) {
            return Err(Error::Config("group orders must be positive".into()));
        }
        let chi = kps_scaling(&edges, &vertices);
        let idx = kps.integer("index")?;
        if idx == 0 {
            return Err(Error::Config("index must be positive".into()));
        }
        // rank - 1 = index * chi ties the free subgroup to the graph data
        if Ratio::new(rank_g as i64 - 1, idx as i64) != chi {
            return Err(Error::Config(format!(
                "kps data gives chi = {chi}, but (rank-1)/index = {}/{idx}",
                rank_g - 1
            )));
        }
        scaling = chi.denom().abs() as f64 / *chi.numer() as f64;
        chi_str = Some(chi.to_string());
        index = Some(idx);
        f_ambient = Some(f_g / idx as f64);
    } else {
        scaling = 1.0 / (rank_g as f64 - 1.0);
    }
    let vf = f_g / (rank_g as f64 - 1.0);

    let scale = if settings.log2 { std::f64::consts::LN_2 } else { 1.0 };
    let envelope = VfDocument {
        command: "vf".into(),
        config_hash: config_hash(config_text),
        log_base: if settings.log2 { "bits".into() } else { "nats".into() },
        f_subgroup: f_g / scale,
        rank_subgroup: rank_g,
        scaling,
        vf: vf / scale,
        chi: chi_str,
        index,
        f_ambient: f_ambient.map(|f| f / scale),
    };
    let mut human = format!(
        "vf  (config {}, output in {})\n  f over the subgroup   {:+.10}\n  subgroup rank         {}\n  scaling               {:.10}\n  vf                    {:+.10}\n",
        envelope.config_hash, envelope.log_base, envelope.f_subgroup, rank_g, scaling, envelope.vf
    );
    if let (Some(chi), Some(idx), Some(fa)) = (&envelope.chi, envelope.index, envelope.f_ambient) {
        human.push_str(&format!(
            "  chi                   {chi}\n  index                 {idx}\n  f over ambient group  {fa:+.10}\n"
        ));
    }
    Ok(CommandOutput {
        human,
        json: serde_json::to_value(&envelope).expect("document serializes"),
        all_pass: true,
    })
}
