//! `channel gen` and `channel inspect`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use serde_json::json;
use sicap_core::channels::{
    bswc, quantized_awgn_wiretap, quantized_awgn_wiretap_jittered, WiretapChannel,
};
use sicap_core::eit::eit_system;
use sicap_core::probability::{mutual_information, LogBase, Pmf};
use sicap_core::spectral::restrict;

use crate::io::{load_channel, resolve_out_dir, ChannelFile, RunManifest, Units};

#[derive(Args)]
pub struct GenArgs {
    /// Binary symmetric wiretap pair: Bob crossover, Eve crossover.
    #[arg(long, num_args = 2, value_names = ["P_BOB", "Q_EVE"], conflicts_with = "awgn")]
    pub bswc: Option<Vec<f64>>,
    /// Input mass on symbol 0 for the binary family.
    #[arg(long, default_value_t = 0.5)]
    pub px0: f64,
    /// Quantized-AWGN alphabet sizes: |X| |Y| |Z|.
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], requires = "bob_snr", requires = "eve_snr")]
    pub awgn: Option<Vec<usize>>,
    /// Bob's Eb/N0 in dB (quantized-AWGN only).
    #[arg(long)]
    pub bob_snr: Option<f64>,
    /// Eve's Eb/N0 in dB (quantized-AWGN only).
    #[arg(long)]
    pub eve_snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative interior bin-edge jitter in [0, 0.5); 0 keeps the regular grid.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Output file; default is a descriptive name in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn gen(args: GenArgs, units: Units, out_dir: Option<PathBuf>) -> Result<()> {
    let (wc, stem, params) = match (&args.bswc, &args.awgn) {
        (Some(pq), None) => {
            let (p, q) = (pq[0], pq[1]);
            let px = Pmf::new(vec![args.px0, 1.0 - args.px0])?;
            let wc = bswc(p, q, px)?;
            let stem = format!("bswc_p{p}_q{q}");
            (wc, stem, json!({"bswc": [p, q], "px0": args.px0}))
        }
        (None, Some(sizes)) => {
            let (nx, ny, nz) = (sizes[0], sizes[1], sizes[2]);
            let bob_db = args.bob_snr.expect("required by clap");
            let eve_db = args.eve_snr.expect("required by clap");
            let wc = if args.jitter > 0.0 {
                quantized_awgn_wiretap_jittered(nx, ny, nz, bob_db, eve_db, args.seed, args.jitter)?
            } else {
                quantized_awgn_wiretap(nx, ny, nz, bob_db, eve_db, args.seed)?
            };
            let stem = format!("awgn_{nx}x{ny}x{nz}_b{bob_db}_e{eve_db}");
            let params = json!({
                "awgn": [nx, ny, nz],
                "bob_snr_db": bob_db,
                "eve_snr_db": eve_db,
                "jitter": args.jitter,
            });
            (wc, stem, params)
        }
        _ => bail!("choose exactly one of --bswc or --awgn"),
    };

    let dir = resolve_out_dir(out_dir)?;
    let path = args
        .output
        .unwrap_or_else(|| dir.join(format!("{stem}.json")));
    ChannelFile::from_channel(&wc).save(&path)?;

    let mut manifest = RunManifest::new("channel gen", units, params).seed(args.seed);
    manifest.output(&path);
    manifest.write(&dir, &stem)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn inspect(path: &Path, units: Units) -> Result<()> {
    let wc: WiretapChannel = load_channel(path)?;
    let f = units.factor();
    let fmt_vec = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.6}"))
            .collect::<Vec<_>>()
            .join(" ")
    };

    println!(
        "alphabets: |X|={} |Y|={} |Z|={}",
        wc.p_x().len(),
        wc.bob().n_outputs(),
        wc.eve().n_outputs()
    );
    println!("input law: {}", fmt_vec(wc.p_x().probs()));
    let py = sicap_core::probability::output_marginal(wc.bob(), wc.p_x())?;
    let pz = sicap_core::probability::output_marginal(wc.eve(), wc.p_x())?;
    println!("main-channel marginal: {}", fmt_vec(py.probs()));
    println!("tap-channel marginal: {}", fmt_vec(pz.probs()));
    let ixy = mutual_information(wc.p_x(), wc.bob(), LogBase::E)?;
    let ixz = mutual_information(wc.p_x(), wc.eve(), LogBase::E)?;
    println!("I(X;Y) = {:.9} {}", ixy * f, units.name());
    println!("I(X;Z) = {:.9} {}", ixz * f, units.name());

    let sys = eit_system(&wc)?;
    let v_r = restrict(sys.v(), sys.basis())?;
    let l_r = restrict(sys.lam(), sys.basis())?;
    println!(
        "restricted commutator norm = {:.3e}",
        v_r.commutator_norm(&l_r)
    );
    Ok(())
}
