use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::channels::{
    correlation_matrix, exponential_correlation, gen_correlated, gen_geometric_upa, gen_rayleigh,
    load_dataset, read_dataset_header, save_dataset, split, ChannelError,
    GeometricUpaSpec,
};
use crate::clustering::{InitStrategy, KMeansConfig, KMeansResult};
use crate::codebooks::{
    correlated_glp, evaluate, evaluate_product, extract_v1, fmt6, glp_codebook, kp_dft_codebook,
    load_codebook, read_codebook_header, save_codebook, train_codebook, train_codebook_detailed,
    train_product_codebook, train_product_codebook_detailed, Codebook, EvalReport,
    GlpConfig, ProductCodebook, SelectionRule, EVAL_CSV_HEADER,
};
use crate::linalg::psd_sqrt;
use crate::manifold::{linear_grid, ripley_k, uniform_reference};

use super::{
    CliError, CompareArgs, EvalArgs, Family, GenArgs, Init, InfoArgs, KMeansArgs, Model, RipleyArgs,
    Rule, TrainArgs,
};

const COMPARE_HEADER: &str = "family,bits,bv,bh,gamma_av,avg_distortion,loss,loss_ub,status";

/// Writes text to `out`, or to standard output for `-`.
fn emit(out: &str, text: &str) -> Result<(), CliError> {
    if out == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()?;
    } else {
        std::fs::write(out, text)?;
    }
    Ok(())
}

fn file_target(out: &str, what: &str) -> Result<(), CliError> {
    if out == "-" {
        return Err(CliError::Usage(format!("{what} is binary; --out needs a file path")));
    }
    Ok(())
}

/// `cb.gbcb` → `cb`; other names are used as they are.
fn stem(path: &str) -> &str {
    path.strip_suffix(".gbcb").unwrap_or(path)
}

fn product_paths(path: &str) -> (String, String) {
    let s = stem(path);
    (format!("{s}.v.gbcb"), format!("{s}.h.gbcb"))
}

fn kmeans_config(a: &KMeansArgs, seed: u64) -> KMeansConfig {
    KMeansConfig {
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        init: match a.init {
            Init::Dsq => InitStrategy::DistanceSquaredSeeding,
            Init::Random => InitStrategy::RandomSubset,
        },
        restarts: a.restarts,
        ..KMeansConfig::new(1, seed)
    }
}

fn rule(r: Rule) -> SelectionRule {
    match r {
        Rule::Gain => SelectionRule::Gain,
        Rule::Distance => SelectionRule::Distance,
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

fn array_dims(a: &GenArgs) -> Result<(usize, usize, usize), CliError> {
    match (a.mt, a.mv, a.mh) {
        (mt, Some(mv), Some(mh)) => {
            let prod = mv * mh;
            if let Some(mt) = mt.filter(|&mt| mt != prod) {
                return Err(ChannelError::DimMismatch(format!(
                    "a {mv}x{mh} array has {prod} elements, --mt is {mt}"
                ))
                .into());
            }
            Ok((prod, mv, mh))
        }
        (Some(mt), None, None) => Ok((mt, 1, mt)),
        (_, Some(_), None) | (_, None, Some(_)) => {
            Err(CliError::Usage("--mv and --mh must be given together".into()))
        }
        (None, None, None) => Err(CliError::Usage("give --mt or both --mv and --mh".into())),
    }
}

pub(super) fn gen(a: GenArgs) -> Result<(), CliError> {
    file_target(&a.out, "a dataset")?;
    let (mt, mv, mh) = array_dims(&a)?;
    let ds = match a.model {
        Model::Rayleigh => gen_rayleigh(a.mr, mt, a.n, a.seed)?.with_array(mv, mh)?,
        Model::Correlated => {
            let r_half = psd_sqrt(&exponential_correlation(mt, a.rho)?).map_err(ChannelError::from)?;
            gen_correlated(a.mr, mt, &r_half, a.n, a.seed)?.with_array(mv, mh)?
        }
        Model::Geometric => {
            if a.mr != 1 {
                return Err(ChannelError::InvalidSpec("the geometric model has mr = 1".into()).into());
            }
            let centers = if a.clusters.is_empty() {
                vec![(0.0, 0.0)]
            } else {
                a.clusters
                    .iter()
                    .map(|c| match parse_list(c, "--cluster")?.as_slice() {
                        &[az, el] => Ok((az.to_radians(), el.to_radians())),
                        _ => Err(CliError::Usage(format!("--cluster expects AZ,EL, got `{c}`"))),
                    })
                    .collect::<Result<_, _>>()?
            };
            let mut spec = GeometricUpaSpec::new(mv, mh, a.paths, centers);
            spec.angle_spread = a.spread.to_radians();
            spec.element_spacing = a.spacing;
            if let Some(g) = &a.gains {
                spec.gain_profile = parse_list(g, "--gains")?;
            }
            gen_geometric_upa(&spec, a.n, a.seed)?
        }
    };
    save_dataset(&ds, &a.out)?;
    eprintln!(
        "wrote {}: n={} mr={} mt={} ({}x{}) model={} seed={}",
        a.out,
        ds.len(),
        ds.mr(),
        ds.mt(),
        ds.mv(),
        ds.mh(),
        ds.model_tag(),
        ds.seed()
    );
    Ok(())
}

fn log_rows(log: &mut String, factor: &str, run: &KMeansResult) {
    for (i, d) in run.distortion_history.iter().enumerate() {
        log.push_str(&format!("{factor},{i},{}\n", fmt6(*d)));
    }
}

pub(super) fn train(a: TrainArgs) -> Result<(), CliError> {
    file_target(&a.out, "a codebook")?;
    let ds = load_dataset(&a.data)?;
    let (train, _) = split(&ds, a.split, a.seed)?;
    let cfg = kmeans_config(&a.kmeans, a.seed);
    let log_path = a.log.clone().unwrap_or_else(|| format!("{}.log.csv", stem(&a.out)));
    let mut log = String::from("factor,iteration,distortion\n");
    if a.product {
        let (bv, bh) = (a.bv.unwrap_or(0), a.bh.unwrap_or(0));
        let (pcb, run_v, run_h) =
            train_product_codebook_detailed(&train, ds.mv(), ds.mh(), bv, bh, &cfg)?;
        let (pv, ph) = product_paths(&a.out);
        save_codebook(&pcb.fv, &pv)?;
        save_codebook(&pcb.fh, &ph)?;
        log_rows(&mut log, "v", &run_v);
        log_rows(&mut log, "h", &run_h);
        emit(&log_path, &log)?;
        eprintln!(
            "wrote {pv} ({} codewords) and {ph} ({} codewords): final distortion v={} h={}",
            pcb.fv.len(),
            pcb.fh.len(),
            fmt6(run_v.distortion()),
            fmt6(run_h.distortion())
        );
    } else {
        let bits = a.bits.unwrap_or(0);
        let (cb, run) = train_codebook_detailed(&train, bits, &cfg)?;
        save_codebook(&cb, &a.out)?;
        log_rows(&mut log, "full", &run);
        emit(&log_path, &log)?;
        eprintln!(
            "wrote {} ({} codewords): final distortion {} after {} iterations",
            a.out,
            cb.len(),
            fmt6(run.distortion()),
            run.iterations
        );
    }
    Ok(())
}

fn per_sample_csv(report: &EvalReport) -> String {
    let mut s = String::from("channel,index,index_h,gain,distortion,loss_ub\n");
    for r in &report.per_sample {
        let ih = r.index_h.map(|i| i.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{ih},{},{},{}\n",
            r.channel,
            r.index,
            fmt6(r.gain),
            fmt6(r.distortion),
            fmt6(r.loss_ub)
        ));
    }
    s
}

fn load_product(path: &str) -> Result<ProductCodebook, CliError> {
    let (pv, ph) = product_paths(path);
    Ok(ProductCodebook::new(load_codebook(pv)?, load_codebook(ph)?))
}

pub(super) fn eval(a: EvalArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.data)?;
    let test = match (a.split, a.seed) {
        (Some(f), Some(seed)) => split(&ds, f, seed)?.1,
        _ => ds,
    };
    let name = a.name.clone().unwrap_or_else(|| {
        Path::new(stem(&a.codebook))
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| a.codebook.clone())
    });
    let (report, rule_name, bits) = if a.product {
        if a.rule == Rule::Gain {
            return Err(CliError::Usage("product codebooks use the distance rule".into()));
        }
        let pcb = load_product(&a.codebook)?;
        (evaluate_product(&test, &pcb)?, "distance".to_string(), pcb.bits())
    } else {
        let cb = load_codebook(&a.codebook)?;
        let r = rule(a.rule);
        (evaluate(&test, &cb, r)?, r.to_string(), cb.bits())
    };
    if report.skipped > 0 {
        eprintln!("skipped {} zero channels", report.skipped);
    }
    emit(&a.out, &format!("{EVAL_CSV_HEADER}\n{}\n", report.csv_row(&name, &rule_name, bits)))?;
    if let Some(p) = &a.per_sample {
        emit(p, &per_sample_csv(&report))?;
    }
    Ok(())
}

fn parse_pair(text: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("--pairs expects BV:BH, got `{text}`"));
    let (v, h) = text.split_once(':').ok_or_else(bad)?;
    Ok((v.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

fn compare_row(family: &str, bits: u32, pair: Option<(u32, u32)>, res: Result<EvalReport, CliError>) -> String {
    let (bv, bh) = pair.map(|(v, h)| (v.to_string(), h.to_string())).unwrap_or_default();
    match res {
        Ok(r) => format!(
            "{family},{bits},{bv},{bh},{},{},{},{},ok",
            fmt6(r.gamma_av),
            fmt6(r.avg_distortion),
            fmt6(r.loss),
            fmt6(r.loss_ub)
        ),
        Err(e) => {
            let msg = e.to_string().replace([',', '\n', '\r'], ";");
            format!("{family},{bits},{bv},{bh},,,,,{msg}")
        }
    }
}

pub(super) fn compare(a: CompareArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.data)?;
    let (train, test) = split(&ds, a.split, a.seed)?;
    let cfg = kmeans_config(&a.kmeans, a.seed);
    let glp_cfg = GlpConfig { restarts: a.glp_restarts, iters: a.glp_iters, seed: a.seed };
    let sel = rule(a.rule);
    let pairs: Vec<(u32, u32)> = if a.pairs.is_empty() {
        a.bits.iter().map(|&b| (b / 2, b - b / 2)).collect()
    } else {
        a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<_, _>>()?
    };
    let glp = |bits: u32| -> Result<Codebook, CliError> { Ok(glp_codebook(ds.mt(), bits, &glp_cfg)?.codebook) };
    let correlation = correlation_matrix(&train);

    let mut rows = vec![COMPARE_HEADER.to_string()];
    let mut ok = 0usize;
    let mut push = |rows: &mut Vec<String>, fam: &str, bits, pair, res: Result<EvalReport, CliError>| {
        if let Err(e) = &res {
            eprintln!("{fam} at {bits} bits failed: {e}");
        } else {
            ok += 1;
        }
        rows.push(compare_row(fam, bits, pair, res));
    };
    for &family in &a.families {
        match family {
            Family::Learned | Family::Glp | Family::CorrelatedGlp => {
                let name = match family {
                    Family::Learned => "learned",
                    Family::Glp => "glp",
                    _ => "correlated-glp",
                };
                for &b in &a.bits {
                    let res = (|| {
                        let cb = match family {
                            Family::Learned => train_codebook(&train, b, &cfg)?,
                            Family::Glp => glp(b)?,
                            _ => correlated_glp(&correlation, &glp(b)?)?,
                        };
                        Ok(evaluate(&test, &cb, sel)?)
                    })();
                    push(&mut rows, name, b, None, res);
                }
            }
            Family::LearnedProduct | Family::KpDft => {
                let name = if family == Family::KpDft { "kp-dft" } else { "learned-product" };
                for &(bv, bh) in &pairs {
                    let res = (|| {
                        let pcb = if family == Family::KpDft {
                            kp_dft_codebook(ds.mv(), ds.mh(), bv, bh)?
                        } else {
                            train_product_codebook(&train, ds.mv(), ds.mh(), bv, bh, &cfg)?
                        };
                        Ok(evaluate_product(&test, &pcb)?)
                    })();
                    push(&mut rows, name, bv + bh, Some((bv, bh)), res);
                }
            }
        }
    }
    let mut text = rows.join("\n");
    text.push('\n');
    emit(&a.out, &text)?;
    if ok == 0 && rows.len() > 1 {
        return Err(CliError::AllFailed);
    }
    Ok(())
}

pub(super) fn ripley(a: RipleyArgs) -> Result<(), CliError> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid needs at least 2 points".into()));
    }
    let ds = load_dataset(&a.data)?;
    let (mut points, skipped) = extract_v1(&ds)?;
    if skipped > 0 {
        eprintln!("skipped {skipped} zero channels");
    }
    if let Some(n) = a.max_points {
        points.truncate(n);
    }
    let grid = linear_grid(a.grid);
    let curve = ripley_k(&points, &grid)?;
    let reference = uniform_reference(ds.mt(), &grid, a.pairs, a.seed)?;
    let mut text = String::from("distance,value,uniform_reference\n");
    for ((d, v), u) in grid.iter().zip(&curve.values).zip(&reference.values) {
        text.push_str(&format!("{},{},{}\n", fmt6(*d), fmt6(*v), fmt6(*u)));
    }
    emit(&a.out, &text)?;
    eprintln!(
        "{} points, Kolmogorov distance to the uniform reference {}",
        points.len(),
        fmt6(curve.kolmogorov_distance(&reference))
    );
    Ok(())
}

pub(super) fn info(a: InfoArgs) -> Result<(), CliError> {
    let mut magic = [0u8; 4];
    File::open(&a.file)?
        .read_exact(&mut magic)
        .map_err(|_| CliError::Usage(format!("{} is too short to identify", a.file.display())))?;
    let text = match &magic {
        b"GBDS" => {
            let h = read_dataset_header(&a.file)?;
            format!(
                "format: dataset\nmr: {}\nmt: {}\nmv: {}\nmh: {}\ncount: {}\nseed: {}\nmodel: {}\n",
                h.mr, h.mt, h.mv, h.mh, h.count, h.seed, h.model_tag
            )
        }
        b"GBCB" => {
            let h = read_codebook_header(&a.file)?;
            format!("format: codebook\nm: {}\nsize: {}\n", h.m, h.k)
        }
        _ => return Err(CliError::Usage(format!("{} is neither a dataset nor a codebook", a.file.display()))),
    };
    emit("-", &text)
}
