use clap::{Args, Parser, Subcommand, ValueEnum};
use ordlab::cspace::{self, NodeFunction};
use ordlab::indexlab::{self, Filtration, Inner, StructuredTree};
use ordlab::ord::Kind;
use ordlab::rat::{fmt_q, parse_q};
use ordlab::seqcheck::{self, AmbientSpace, ConvertInput, ConvertMode, DualCertificate};
use ordlab::trees::{self, IndexTree, Replace};
use ordlab::xnorm::{self, SchreierVector};
use ordlab::{Error, FinSet, Ordinal, SchreierIndex, Q};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact ordinal, Schreier-space and ℓ1-index computations.
#[derive(Parser)]
#[command(name = "ordlab", version)]
struct Cli {
    /// write the JSON report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ordinal arithmetic in Cantor normal form
    #[command(subcommand)]
    Ord(OrdCmd),
    /// Schreier families
    #[command(subcommand)]
    Schreier(SchreierCmd),
    /// Schreier norm of a vector
    Norm {
        #[arg(long)]
        alpha: String,
        /// vector JSON, or @file
        #[arg(long)]
        vector: String,
    },
    /// Sequence certificates
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Index trees
    #[command(subcommand)]
    Tree(TreeCmd),
    /// The node basis of C(S_α) and step functions
    #[command(subcommand)]
    Cspace(CspaceCmd),
    /// Index certificates
    #[command(subcommand)]
    Lab(LabCmd),
}

#[derive(Subcommand)]
enum OrdCmd {
    /// Parse and print in canonical form
    Eval { a: String },
    Add { a: String, b: String },
    Mul { a: String, b: String },
    /// ω^a
    Pow { a: String },
    Compare { a: String, b: String },
    /// a[n]
    Fundamental { a: String, n: u64 },
    Classify { a: String },
}

#[derive(Subcommand)]
enum SchreierCmd {
    Member {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        set: String,
    },
    Enum {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u32,
    },
    Maximal {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        set: String,
    },
    /// Order of the subtree above a set, or with `--n` the order of the
    /// tree over `[1..n]`
    Rank {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        n: Option<u32>,
    },
}

#[derive(Args)]
struct SeqInput {
    /// JSON array of vectors, or @file
    #[arg(long)]
    seq: String,
    /// ambient space JSON, or @file
    #[arg(long, conflicts_with = "alpha")]
    space: Option<String>,
    /// shorthand for the Schreier space X_α
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Subcommand)]
enum SeqCmd {
    Analyze(SeqInput),
    BranchFunctional {
        #[command(flatten)]
        input: SeqInput,
        #[arg(long)]
        k: String,
    },
    Convert {
        #[command(flatten)]
        input: SeqInput,
        #[arg(long)]
        mode: String,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        /// dual certificate JSON, or @file
        #[arg(long)]
        functional: Option<String>,
        /// comma-separated rationals
        #[arg(long)]
        coefficients: Option<String>,
    },
    ConcatBound {
        #[command(flatten)]
        input: SeqInput,
        /// the second sequence
        #[arg(long)]
        yseq: String,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    Order {
        #[arg(long)]
        tree: String,
    },
    Derive {
        #[arg(long)]
        tree: String,
    },
    Minimal {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 8)]
        depth: u64,
        #[arg(long, default_value_t = 3)]
        breadth: u64,
    },
    /// T(α,β); `--beta s` for the infinitely branching replacement
    Replace {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 8)]
        depth: u64,
        #[arg(long, default_value_t = 3)]
        breadth: u64,
    },
    Restrict {
        #[arg(long)]
        sub: String,
        #[arg(long)]
        tree: String,
    },
    Glue {
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long, conflicts_with = "alpha")]
        space: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
    },
}

#[derive(Subcommand)]
enum CspaceCmd {
    Cnorm {
        /// node function JSON, or @file
        #[arg(long)]
        f: String,
        /// also report the prefix norms under the admissible enumeration
        /// of `S_α ∩ 2^[1..n]`
        #[arg(long)]
        n: Option<u32>,
    },
    Enum {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u32,
    },
    /// ψ on `S_α ∩ 2^[1..n]`, and U x when a vector is given
    Embed {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        vector: Option<String>,
    },
    EmbedSum {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u32,
        #[arg(long = "big-n")]
        big_n: u32,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// ℓ1-1-tree of step functions, `gamma` steps from the empty tree
    Steptree {
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        breadth: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FiltrationArg {
    P,
    Q,
}

#[derive(Subcommand)]
enum LabCmd {
    Canonical {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u32,
    },
    SmallSup {
        #[arg(long)]
        seq: String,
    },
    James {
        #[command(flatten)]
        input: SeqInput,
        #[arg(long = "K")]
        big_k: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        delta: String,
    },
    /// Staircase walk on a seeded synthetic structured tree
    Staircase {
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum, default_value = "p")]
        filtration: FiltrationArg,
        #[arg(long)]
        breadth: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Certify {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 8)]
        n: u32,
    },
    /// Recompute a dossier and compare
    Validate {
        /// dossier JSON, or @file
        #[arg(long)]
        dossier: String,
    },
}

type Res = std::result::Result<Value, Error>;

fn text(arg: &str) -> Result<String, Error> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn json_arg(arg: &str) -> Result<Value, Error> {
    serde_json::from_str(&text(arg)?).map_err(|e| Error::Parse(e.to_string()))
}

fn ordinal(s: &str) -> Result<Ordinal, Error> {
    s.parse()
}

fn index(s: &str) -> Result<SchreierIndex, Error> {
    Ok(SchreierIndex::new(ordinal(s)?))
}

fn finset(s: &str) -> Result<FinSet, Error> {
    s.parse()
}

fn rational(s: &str) -> Result<Q, Error> {
    parse_q(s)
}

fn vector(s: &str) -> Result<SchreierVector, Error> {
    SchreierVector::from_json(&json_arg(s)?)
}

fn vectors(s: &str) -> Result<Vec<SchreierVector>, Error> {
    match json_arg(s)? {
        Value::Array(items) => items.iter().map(SchreierVector::from_json).collect(),
        _ => Err(Error::Parse("expected a JSON array of vectors".into())),
    }
}

fn tree(s: &str) -> Result<IndexTree, Error> {
    IndexTree::from_json(&json_arg(s)?)
}

fn space(spec: &Option<String>, alpha: &Option<String>) -> Result<AmbientSpace, Error> {
    match (spec, alpha) {
        (Some(s), _) => AmbientSpace::from_json(&json_arg(s)?),
        (None, Some(a)) => Ok(AmbientSpace::schreier(ordinal(a)?)),
        (None, None) => Err(Error::Parse("give --space or --alpha".into())),
    }
}

fn seq_input(i: &SeqInput) -> Result<(Vec<SchreierVector>, AmbientSpace), Error> {
    Ok((vectors(&i.seq)?, space(&i.space, &i.alpha)?))
}

fn ord_cmd(c: &OrdCmd) -> Res {
    let one = |o: Ordinal| json!({ "result": o.to_string() });
    Ok(match c {
        OrdCmd::Eval { a } => one(ordinal(a)?),
        OrdCmd::Add { a, b } => one(ordinal(a)?.add(&ordinal(b)?)),
        OrdCmd::Mul { a, b } => one(ordinal(a)?.mul(&ordinal(b)?)),
        OrdCmd::Pow { a } => one(Ordinal::omega_pow(&ordinal(a)?)),
        OrdCmd::Compare { a, b } => {
            let r = match ordinal(a)?.cmp(&ordinal(b)?) {
                Ordering::Less => "LT",
                Ordering::Equal => "EQ",
                Ordering::Greater => "GT",
            };
            json!({ "result": r })
        }
        OrdCmd::Fundamental { a, n } => one(ordinal(a)?.fundamental(*n)?),
        OrdCmd::Classify { a } => {
            let k = match ordinal(a)?.classify() {
                Kind::Zero => "Zero",
                Kind::Successor => "Successor",
                Kind::Limit => "Limit",
            };
            json!({ "result": k })
        }
    })
}

fn schreier_cmd(c: &SchreierCmd) -> Res {
    Ok(match c {
        SchreierCmd::Member { alpha, set } => json!({ "member": index(alpha)?.contains(&finset(set)?) }),
        SchreierCmd::Enum { alpha, n } => {
            let sets = index(alpha)?.enumerate(*n)?;
            json!({ "count": sets.len(), "sets": sets.iter().map(ToString::to_string).collect::<Vec<_>>() })
        }
        SchreierCmd::Maximal { alpha, set } => json!({ "maximal": index(alpha)?.is_maximal(&finset(set)?)? }),
        SchreierCmd::Rank { alpha, set, n } => {
            let idx = index(alpha)?;
            let mut out = serde_json::Map::new();
            if let Some(n) = n {
                out.insert("restricted_order".into(), json!(idx.restricted_order(*n)?));
            }
            if set.is_some() || n.is_none() {
                let f = set.as_deref().map(finset).transpose()?.unwrap_or_else(FinSet::empty);
                out.insert("order".into(), json!(idx.node_order(&f)?.to_string()));
            }
            Value::Object(out)
        }
    })
}

fn seq_cmd(c: &SeqCmd) -> Res {
    match c {
        SeqCmd::Analyze(i) => {
            let (seq, sp) = seq_input(i)?;
            Ok(seqcheck::analyze(&seq, &sp)?.to_json())
        }
        SeqCmd::BranchFunctional { input, k } => {
            let (seq, sp) = seq_input(input)?;
            Ok(seqcheck::branch_functional(&seq, &rational(k)?, &sp)?.to_json())
        }
        SeqCmd::Convert {
            input,
            mode,
            k,
            lambda,
            functional,
            coefficients,
        } => {
            let (seq, sp) = seq_input(input)?;
            let mode: ConvertMode = mode.parse()?;
            let extra = ConvertInput {
                functional: functional
                    .as_deref()
                    .map(|f| DualCertificate::from_json(&json_arg(f)?))
                    .transpose()?,
                k: k.as_deref().map(rational).transpose()?,
                lambda: lambda.as_deref().map(rational).transpose()?,
                coefficients: coefficients
                    .as_deref()
                    .map(|s| s.split(',').map(|t| rational(t.trim())).collect())
                    .transpose()?,
            };
            Ok(seqcheck::convert(&seq, mode, &extra, &sp)?.to_json())
        }
        SeqCmd::ConcatBound { input, yseq, k } => {
            let (seq, sp) = seq_input(input)?;
            Ok(seqcheck::concat_bound(&seq, &vectors(yseq)?, *k, &sp)?.to_json())
        }
    }
}

fn tree_cmd(c: &TreeCmd) -> Res {
    Ok(match c {
        TreeCmd::Order { tree: t } => json!({ "order": tree(t)?.order_finite() }),
        TreeCmd::Derive { tree: t } => tree(t)?.derive().to_json(),
        TreeCmd::Minimal { alpha, depth, breadth } => {
            let t = trees::minimal_tree(&ordinal(alpha)?, *depth, *breadth)?;
            json!({ "order": t.order_finite(), "tree": t.to_json() })
        }
        TreeCmd::Replace {
            alpha,
            beta,
            depth,
            breadth,
        } => {
            let with = match beta.as_str() {
                "s" => Replace::S,
                b => Replace::Ordinal(ordinal(b)?),
            };
            let r = trees::replacement_tree(&ordinal(alpha)?, &with, *depth, *breadth)?;
            json!({
                "order": r.tree.order_finite(),
                "nodes": r.tree.len(),
                "mapped_nodes": r.map.as_ref().map(|(m, _)| m.assignment.len()),
                "order_preserving": r.map.as_ref().map(|(m, _)| m.is_order_preserving()),
                "tree": r.tree.to_json(),
            })
        }
        TreeCmd::Restrict { sub, tree: t } => {
            let r = trees::restrict(&tree(sub)?, &tree(t)?)?;
            json!({ "order": r.order_finite(), "tree": r.to_json() })
        }
        TreeCmd::Glue { s, t, space: sp, alpha } => trees::glue(&tree(s)?, &tree(t)?, &space(sp, alpha)?)?.to_json(),
    })
}

fn node_function(s: &str) -> Result<NodeFunction, Error> {
    NodeFunction::from_json(&json_arg(s)?)
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

fn cspace_cmd(c: &CspaceCmd) -> Res {
    Ok(match c {
        CspaceCmd::Cnorm { f, n } => {
            let f = node_function(f)?;
            let mut out = json!({ "value": fmt_q(&cspace::cnorm(&f)) });
            if let Some(n) = n {
                let en = cspace::admissible_enumeration(f.alpha(), *n)?;
                out["prefix_norms"] = json!(qs(&cspace::monotone_check(&f, &en)?));
            }
            out
        }
        CspaceCmd::Enum { alpha, n } => {
            let en = cspace::admissible_enumeration(&index(alpha)?, *n)?;
            json!({ "order": en.order.iter().map(ToString::to_string).collect::<Vec<_>>() })
        }
        CspaceCmd::Embed { alpha, n, vector: v } => {
            let psi = cspace::build_psi(&index(alpha)?, *n)?;
            let mut out = json!({
                "psi": psi.pairs().iter().map(|(g, h)| json!([g.to_string(), h.to_string()])).collect::<Vec<_>>(),
                "rank_condition": psi.rank_condition()?,
            });
            if let Some(v) = v {
                let x = vector(v)?;
                let u = psi.embed_u(&x)?;
                out["image"] = u.to_json();
                out["cnorm"] = json!(fmt_q(&cspace::cnorm(&u)));
                out["norm"] = json!(fmt_q(&xnorm::schreier_norm(&x, psi.alpha())?.value));
            }
            out
        }
        CspaceCmd::EmbedSum {
            n,
            k,
            big_n,
            samples,
            seed,
        } => {
            let e = cspace::embed_sum(*n, *k, *big_n)?;
            e.check_conditions()?;
            json!({
                "pairs": e.pairs().iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect::<Vec<_>>(),
                "conditions": "ok",
                "distortion": e.distortion(*samples, *seed)?.to_json(),
            })
        }
        CspaceCmd::Steptree { gamma, depth, breadth } => {
            let t = cspace::l1_tree_c0(&ordinal(gamma)?, &cspace::C0Tree::empty(Ordinal::zero()), *depth, *breadth)?;
            json!({
                "top": t.top().to_string(),
                "order": t.order(),
                "l1_constants": qs(&t.certify()?),
            })
        }
    })
}

fn lab_cmd(c: &LabCmd) -> Res {
    match c {
        LabCmd::Canonical { alpha, n } => Ok(indexlab::canonical_l1_tree(&index(alpha)?, *n)?.to_json()),
        LabCmd::SmallSup { seq } => Ok(indexlab::small_sup_combination(&vectors(seq)?)?.to_json()),
        LabCmd::James { input, big_k, k, delta } => {
            let (seq, sp) = seq_input(input)?;
            let r = indexlab::james_blocks(&seq, &sp, &rational(big_k)?, *k, &rational(delta)?)?;
            Ok(json!({
                "stages": r.stages,
                "l1_constant": fmt_q(&r.l1_constant),
                "blocks": r.blocks.iter().map(SchreierVector::to_json).collect::<Vec<_>>(),
            }))
        }
        LabCmd::Staircase {
            m,
            filtration,
            breadth,
            seed,
        } => {
            let f = match filtration {
                FiltrationArg::P => Filtration::Coordinates,
                FiltrationArg::Q => Filtration::InitialNodes,
            };
            let breadth = breadth.unwrap_or(if *m > 4 { 1 } else { 2 });
            let t = StructuredTree::synthetic(*m, breadth, f, *seed)?;
            let inner = match f {
                Filtration::Coordinates => Inner::Sup,
                Filtration::InitialNodes => Inner::Norm(t.space.clone()),
            };
            Ok(indexlab::staircase(&t, *m as usize, f, &inner)?.to_json())
        }
        LabCmd::Certify { alpha, n } => indexlab::certify_index_lower_bound(&index(alpha)?, *n),
        LabCmd::Validate { dossier } => Ok(json!({ "valid": indexlab::validate_dossier(&json_arg(dossier)?)? })),
    }
}

fn dispatch(cmd: &Cmd) -> Res {
    match cmd {
        Cmd::Ord(c) => ord_cmd(c),
        Cmd::Schreier(c) => schreier_cmd(c),
        Cmd::Norm { alpha, vector: v } => Ok(xnorm::schreier_norm(&vector(v)?, &index(alpha)?)?.to_json()),
        Cmd::Seq(c) => seq_cmd(c),
        Cmd::Tree(c) => tree_cmd(c),
        Cmd::Cspace(c) => cspace_cmd(c),
        Cmd::Lab(c) => lab_cmd(c),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Undetermined(_) => 3,
        Error::Internal(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(mut v) => {
            if let Value::Object(m) = &mut v {
                m.insert("version".into(), json!(ordlab::VERSION));
                m.insert("convention".into(), json!(ordlab::CONVENTION));
            }
            let body = serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n";
            match &cli.out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, body) {
                        eprintln!("ordlab: {}: {e}", p.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{body}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ordlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
