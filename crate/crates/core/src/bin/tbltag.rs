//! Command-line driver: train, tag, and evaluate pipelines over files.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tbltag::context::{learn_contextual_rules, tag, TriggerInventory};
use tbltag::corpus::{parse_raw, parse_tagged, render_tagged, Corpus, Tag, Word};
use tbltag::engine::LearnerConfig;
use tbltag::eval::{evaluate, format_ratio, render_report_machine, render_report_text};
use tbltag::initial::{annotate_initial, UnknownTagDefaults};
use tbltag::kbest::{
    apply_kbest_rule, baseline_tagsets, kbest_metrics, learn_kbest_rules, parse_decimal_ratio,
    KBestConfig, KBestMetrics, TagSetCorpus,
};
use tbltag::lexicon::{BigramTable, Lexicon, Wordlist};
use tbltag::model::ModelBundle;
use tbltag::ruleio::{parse_rules, render_rules, RuleLine};
use tbltag::unknown::learn_unknown_rules;

#[derive(Parser)]
#[command(name = "tbltag", version, about = "Transformation-based part-of-speech tagger")]
struct Cli {
    /// Cap the number of worker threads (output is identical either way).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lexicon (and optionally a wordlist) from a tagged corpus.
    Lexicon(LexiconArgs),
    /// Learn unknown-word rules from a tagged corpus.
    TrainUnknown(TrainUnknownArgs),
    /// Learn contextual rules from a tagged corpus.
    TrainContext(TrainContextArgs),
    /// Learn k-best add-tag rules on top of a trained model.
    TrainKbest(TrainKbestArgs),
    /// Tag raw text with a trained model.
    Tag(TagArgs),
    /// Compare a system tagging against a gold corpus.
    Eval(EvalArgs),
}

#[derive(Args)]
struct LexiconArgs {
    /// Tagged training corpus.
    #[arg(long = "tagged", value_name = "IN")]
    tagged: PathBuf,
    /// Lexicon output path.
    #[arg(long, value_name = "LEX")]
    out: PathBuf,
    /// Also write the wordlist (lexicon words plus any extras).
    #[arg(long = "wordlist-out", value_name = "WL")]
    wordlist_out: Option<PathBuf>,
    /// Extra word forms to union into the wordlist, one per line.
    #[arg(long = "extra-words", value_name = "FILE")]
    extra_words: Option<PathBuf>,
}

#[derive(Args)]
struct TrainUnknownArgs {
    #[arg(long = "tagged", value_name = "IN")]
    tagged: PathBuf,
    /// Fraction of sentences used to build the lexicon/wordlist/bigram
    /// tables; the rest supplies the unknown-word training instances.
    #[arg(long, default_value = "0.5")]
    split: String,
    /// Minimum net score for accepting a rule.
    #[arg(long, default_value_t = 2)]
    threshold: i64,
    #[arg(long = "cap-tag", default_value = "NNP")]
    cap_tag: String,
    #[arg(long = "default-tag", default_value = "NN")]
    default_tag: String,
    #[arg(long, value_name = "RULES")]
    out: PathBuf,
    #[arg(long = "max-rules")]
    max_rules: Option<usize>,
}

#[derive(Args)]
struct TrainContextArgs {
    #[arg(long = "tagged", value_name = "IN")]
    tagged: PathBuf,
    #[arg(long, value_name = "LEX")]
    lexicon: PathBuf,
    /// Unknown-word rules applied during initial annotation.
    #[arg(long = "unknown-rules", value_name = "UR")]
    unknown_rules: Option<PathBuf>,
    /// Wordlist for unknown-rule triggers; defaults to the lexicon's words.
    #[arg(long, value_name = "WL")]
    wordlist: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    threshold: i64,
    /// Restrict learning to tag-based triggers (no lexicalized rules).
    #[arg(long = "tag-triggers-only")]
    tag_triggers_only: bool,
    #[arg(long = "cap-tag", default_value = "NNP")]
    cap_tag: String,
    #[arg(long = "default-tag", default_value = "NN")]
    default_tag: String,
    #[arg(long, value_name = "RULES")]
    out: PathBuf,
    #[arg(long = "max-rules")]
    max_rules: Option<usize>,
}

#[derive(Args)]
struct TrainKbestArgs {
    /// Tagged held-out corpus (the truth); the single-tag tagger's output
    /// on its words is the starting point.
    #[arg(long = "tagged", value_name = "IN")]
    tagged: PathBuf,
    #[arg(long, value_name = "BUNDLE")]
    model: PathBuf,
    /// Minimum (newly covered)/(tags added) ratio, as a decimal.
    #[arg(long = "min-ratio", default_value = "0.05")]
    min_ratio: String,
    /// Minimum newly covered tokens per rule.
    #[arg(long = "min-covered", default_value_t = 2)]
    min_covered: u64,
    #[arg(long = "max-rules")]
    max_rules: Option<usize>,
    #[arg(long, value_name = "RULES")]
    out: PathBuf,
}

#[derive(Args)]
struct TagArgs {
    #[arg(long = "raw", value_name = "IN")]
    raw: PathBuf,
    #[arg(long, value_name = "BUNDLE")]
    model: PathBuf,
    #[arg(long, value_name = "OUT")]
    out: PathBuf,
    /// Emit k-best tag sets using the bundle's k-best rules.
    #[arg(long)]
    kbest: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// System output; required except in baseline mode.
    #[arg(long, value_name = "SYS")]
    sys: Option<PathBuf>,
    #[arg(long, value_name = "GOLD")]
    gold: PathBuf,
    #[arg(long, value_name = "LEX")]
    lexicon: PathBuf,
    /// The system file holds k-best tag sets.
    #[arg(long)]
    kbest: bool,
    /// Score the k-best baseline (all training tags per known word, the K
    /// most frequent unknown-word tags otherwise) instead of a system file.
    #[arg(long = "kbest-baseline", value_name = "K")]
    kbest_baseline: Option<usize>,
    /// Emit a machine-readable key=value block.
    #[arg(long)]
    machine: bool,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Data(err.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_tagged(path: &Path) -> Result<Corpus, CliError> {
    parse_tagged(&read_file(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_lexicon(path: &Path) -> Result<Lexicon, CliError> {
    Lexicon::parse(&read_file(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_defaults(cap: &str, default: &str) -> Result<UnknownTagDefaults, CliError> {
    Ok(UnknownTagDefaults {
        capitalized_tag: Tag::new(cap).map_err(|e| usage(format!("--cap-tag: {e}")))?,
        default_tag: Tag::new(default).map_err(|e| usage(format!("--default-tag: {e}")))?,
    })
}

fn learner_config(threshold: i64, max_rules: Option<usize>) -> Result<LearnerConfig, CliError> {
    if threshold < 1 {
        return Err(usage("--threshold must be >= 1"));
    }
    Ok(LearnerConfig {
        min_net_score: threshold,
        max_rules,
    })
}

fn cmd_lexicon(args: &LexiconArgs) -> Result<(), CliError> {
    let corpus = read_tagged(&args.tagged)?;
    let lexicon = Lexicon::build(&corpus).map_err(data)?;
    write_file(&args.out, &lexicon.render())?;
    if let Some(wordlist_out) = &args.wordlist_out {
        let mut extra = Vec::new();
        if let Some(extra_path) = &args.extra_words {
            for line in read_file(extra_path)?.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                extra.push(
                    Word::new(line)
                        .map_err(|e| CliError::Data(format!("{}: {e}", extra_path.display())))?,
                );
            }
        }
        let wordlist = Wordlist::build(&lexicon, &extra);
        write_file(wordlist_out, &wordlist.render())?;
    }
    Ok(())
}

fn cmd_train_unknown(args: &TrainUnknownArgs) -> Result<(), CliError> {
    let split = args
        .split
        .parse::<f64>()
        .ok()
        .filter(|s| *s > 0.0 && *s < 1.0)
        .ok_or_else(|| usage("--split must be a number strictly between 0 and 1"))?;
    let cfg = learner_config(args.threshold, args.max_rules)?;
    let defaults = parse_defaults(&args.cap_tag, &args.default_tag)?;
    let corpus = read_tagged(&args.tagged)?;
    let learned = learn_unknown_rules(&corpus, split, &cfg, &defaults).map_err(data)?;
    let rules: Vec<_> = learned.iter().map(|(r, _)| r.clone()).collect();
    write_file(&args.out, &render_rules(&rules))?;
    for (rule, score) in &learned {
        println!("{}\t{}\t{}", rule.render_line(), score.good, score.bad);
    }
    Ok(())
}

fn cmd_train_context(args: &TrainContextArgs) -> Result<(), CliError> {
    let cfg = learner_config(args.threshold, args.max_rules)?;
    let defaults = parse_defaults(&args.cap_tag, &args.default_tag)?;
    let truth = read_tagged(&args.tagged)?;
    let lexicon = read_lexicon(&args.lexicon)?;
    let unknown_rules = match &args.unknown_rules {
        Some(path) => parse_rules(&read_file(path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        None => Vec::new(),
    };
    let wordlist = match &args.wordlist {
        Some(path) => Wordlist::parse(&read_file(path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        None => Wordlist::build(&lexicon, []),
    };
    let bigrams = BigramTable::build(&truth);
    let initial = annotate_initial(&truth, &lexicon, &unknown_rules, &wordlist, &bigrams, &defaults);
    let inventory = if args.tag_triggers_only {
        TriggerInventory::TagOnly
    } else {
        TriggerInventory::Full
    };
    let learned = learn_contextual_rules(&initial, &truth, &cfg, inventory).map_err(data)?;
    let rules: Vec<_> = learned.iter().map(|(r, _)| r.clone()).collect();
    write_file(&args.out, &render_rules(&rules))?;
    for (rule, score) in &learned {
        println!("{}\t{}\t{}", rule.render_line(), score.good, score.bad);
    }
    Ok(())
}

fn cmd_train_kbest(args: &TrainKbestArgs) -> Result<(), CliError> {
    let min_ratio = parse_decimal_ratio(&args.min_ratio)
        .filter(|r| *r.numer() > 0)
        .ok_or_else(|| usage("--min-ratio must be a decimal > 0"))?;
    if args.min_covered < 1 {
        return Err(usage("--min-covered must be >= 1"));
    }
    let cfg = KBestConfig {
        min_ratio,
        min_covered: args.min_covered,
        max_rules: args.max_rules,
    };
    let truth = read_tagged(&args.tagged)?;
    let model = ModelBundle::load_from_file(&args.model).map_err(data)?;
    let raw = truth.strip_tags();
    let bigrams = BigramTable::build(&raw);
    let tagged = tag(
        &raw,
        &model.lexicon,
        &model.unknown_rules,
        &model.contextual_rules,
        &model.wordlist,
        &bigrams,
        &model.defaults,
    );
    let learned = learn_kbest_rules(&tagged, &truth, &cfg).map_err(data)?;
    let rules: Vec<_> = learned.iter().map(|(r, _)| r.clone()).collect();
    write_file(&args.out, &render_rules(&rules))?;
    for (rule, score) in &learned {
        println!("{}\t{}\t{}", rule.render_line(), score.covered, score.added);
    }
    Ok(())
}

fn cmd_tag(args: &TagArgs) -> Result<(), CliError> {
    let raw = parse_raw(&read_file(&args.raw)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.raw.display())))?;
    let model = ModelBundle::load_from_file(&args.model).map_err(data)?;
    // The input text itself supplies the neighbor table for unknown-word
    // triggers, the way any unannotated text can.
    let bigrams = BigramTable::build(&raw);
    let tagged = tag(
        &raw,
        &model.lexicon,
        &model.unknown_rules,
        &model.contextual_rules,
        &model.wordlist,
        &bigrams,
        &model.defaults,
    );
    let output = if args.kbest {
        let kbest_rules = model
            .kbest_rules
            .as_ref()
            .ok_or_else(|| CliError::Data("model bundle has no kbest_rules".to_string()))?;
        let mut sets = TagSetCorpus::from_single(&tagged).map_err(data)?;
        for rule in kbest_rules {
            sets = apply_kbest_rule(rule, &sets);
        }
        sets.render()
    } else {
        render_tagged(&tagged).map_err(data)?
    };
    write_file(&args.out, &output)
}

fn render_metrics_text(m: &KBestMetrics) -> String {
    format!(
        "accuracy   {} ({}/{})\navg tags   {} ({}/{})\n",
        format_ratio(m.accuracy(), 4),
        m.covered_tokens,
        m.total_tokens,
        format_ratio(m.avg_tags(), 2),
        m.total_tags,
        m.total_tokens,
    )
}

fn render_metrics_machine(m: &KBestMetrics) -> String {
    format!(
        "covered_tokens={}\ntotal_tokens={}\ntotal_tags={}\naccuracy={}\navg_tags={}\n",
        m.covered_tokens,
        m.total_tokens,
        m.total_tags,
        format_ratio(m.accuracy(), 4),
        format_ratio(m.avg_tags(), 2),
    )
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let gold = read_tagged(&args.gold)?;
    let lexicon = read_lexicon(&args.lexicon)?;

    let metrics = if let Some(k) = args.kbest_baseline {
        if k < 1 {
            return Err(usage("--kbest-baseline must be >= 1"));
        }
        let base = baseline_tagsets(&gold, &lexicon, k).map_err(data)?;
        Some(kbest_metrics(&base, &gold).map_err(data)?)
    } else if args.kbest {
        let sys_path = args
            .sys
            .as_ref()
            .ok_or_else(|| usage("--sys is required without --kbest-baseline"))?;
        let sys = TagSetCorpus::parse(&read_file(sys_path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", sys_path.display())))?;
        Some(kbest_metrics(&sys, &gold).map_err(data)?)
    } else {
        None
    };

    if let Some(metrics) = metrics {
        if args.machine {
            print!("{}", render_metrics_machine(&metrics));
        } else {
            print!("{}", render_metrics_text(&metrics));
        }
        return Ok(());
    }

    let sys_path = args
        .sys
        .as_ref()
        .ok_or_else(|| usage("--sys is required without --kbest-baseline"))?;
    let sys = read_tagged(sys_path)?;
    let report = evaluate(&sys, &gold, &lexicon).map_err(data)?;
    if args.machine {
        print!("{}", render_report_machine(&report));
    } else {
        print!("{}", render_report_text(&report));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads < 1 {
            return Err(usage("--threads must be >= 1"));
        }
        // Ignore failure: the global pool can only be set once (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match &cli.command {
        Command::Lexicon(args) => cmd_lexicon(args),
        Command::TrainUnknown(args) => cmd_train_unknown(args),
        Command::TrainContext(args) => cmd_train_context(args),
        Command::TrainKbest(args) => cmd_train_kbest(args),
        Command::Tag(args) => cmd_tag(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
        Err(_) => {
            // The panic hook has already printed the details.
            eprintln!("error: internal invariant violation");
            ExitCode::from(3)
        }
    }
}
