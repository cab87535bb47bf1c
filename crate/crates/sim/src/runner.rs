//! Monte-Carlo BLER driver.
//!
//! Trials of one SNR point run in fixed-size batches; the batch is spread
//! over the rayon pool and the stop rule is checked between batches, so the
//! counts, and hence the CSV, do not depend on the worker count.
use std::time::Instant;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use aiot_phy::channel::{
    add_awgn, backscatter_cascade, doppler_hz, fdma_superpose, realize_with, ChannelRealization, UserLink,
};
use aiot_phy::codec::{cc_encode, cc_encode_swept, crc_attach, crc_check, CrcSpec, DecoderInput, ViterbiDecoder};
use aiot_phy::modem_d2r::{backscatter_apply, backscatter_render, stretch, BackscatterMap, SfoModel};
use aiot_phy::receiver::{
    cascade_gains, coherent_llrs, extract_user, inband_power, noncoherent_bits, D2rWaveform, Genie, ReceiverConfig,
    ReceiverMode,
};
use aiot_phy::{BitBlock, BlockRole, LlrBlock, SampleWaveform};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::csv_io::BlerRecord;
use crate::error::{Result, SimError};
use crate::scheme::{resolve, LinkSetup, Scheme, SchemeKind};

pub const SNR_DEF_CODEC: &str = "Es/N0 per coded bit; unit-energy BPSK symbols";
pub const SNR_DEF_LINK: &str = "Es/N0 per coded bit at the reader; Es from backscatter power within the receive \
    bandwidth of the fundamental lines (DC for FM0), unit mean channel power gain";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub workers: Option<usize>,
    /// Write measured wall time; off gives byte-identical CSVs across runs.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            timing: true,
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `hash(seed, snr_index, trial_index)`.
pub fn trial_seed(seed: u64, snr_index: usize, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ snr_index as u64) ^ trial_index)
}

#[derive(Debug, Clone, Copy)]
enum Stream {
    Message = 1,
    Channel = 2,
    Noise = 3,
    Clock = 4,
}

fn stream_rng(trial: u64, s: Stream) -> SmallRng {
    SmallRng::seed_from_u64(splitmix64(trial ^ (s as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub blocks: u64,
    pub errors: u64,
    pub crc_failures: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            blocks: self.blocks + o.blocks,
            errors: self.errors + o.errors,
            crc_failures: self.crc_failures + o.crc_failures,
        }
    }
}

/// Everything a trial needs that does not change between trials.
pub struct TrialContext<'a> {
    pub cfg: &'a ExperimentConfig,
    pub scheme: &'a Scheme,
    decoder: ViterbiDecoder,
    crc: Option<CrcSpec>,
    doppler: f64,
    /// In-band share of each user's transmitted power.
    inband: Vec<f64>,
}

/// Averaged over a few messages drawn from a fixed seed.
fn inband_share(
    cfg: &ExperimentConfig,
    scheme: &Scheme,
    w: &D2rWaveform,
    map: &BackscatterMap,
    rx: &ReceiverConfig,
    fs: f64,
) -> Result<f64> {
    let mut rng = SmallRng::seed_from_u64(splitmix64(cfg.seed ^ 0x1B));
    let n = cfg.info_bits + cfg.code.crc_length;
    let mut share = 0.0;
    for _ in 0..4 {
        let msg = BitBlock::message((0..n).map(|_| rng.random_range(0..2u8)).collect())?;
        let x = backscatter_apply(&w.modulate(&cc_encode(&msg, &scheme.code)?)?, map, fs)?;
        share += inband_power(&x, w, rx.bandwidth(w)) / x.power() / 4.0;
    }
    Ok(share)
}

impl<'a> TrialContext<'a> {
    pub fn new(cfg: &'a ExperimentConfig, scheme: &'a Scheme) -> Self {
        Self {
            cfg,
            scheme,
            decoder: ViterbiDecoder::new(scheme.code.clone()),
            crc: (cfg.code.crc_length > 0).then(|| CrcSpec::new(cfg.code.crc_variant)),
            doppler: doppler_hz(cfg.channel.speed_kmh, cfg.channel.cascade.cw_freq),
            inband: match &scheme.kind {
                SchemeKind::CodedBpsk => Ok(Vec::new()),
                SchemeKind::Pdrch(l) => inband_share(cfg, scheme, &l.waveform, &l.map, &l.rx, l.sample_rate).map(|s| vec![s]),
                SchemeKind::Fdma {
                    users,
                    map,
                    rx,
                    sample_rate,
                    ..
                } => users
                    .iter()
                    .map(|w| inband_share(cfg, scheme, w, map, rx, *sample_rate))
                    .collect::<Result<_>>(),
            }
            .expect("resolved schemes modulate"),
        }
    }

    fn snr(&self, snr_db: f64) -> Option<f64> {
        self.cfg.noise.then_some(snr_db)
    }

    /// Information bits and the block handed to the encoder.
    fn message(&self, rng: &mut SmallRng) -> Result<(Vec<u8>, BitBlock)> {
        let info: Vec<u8> = (0..self.cfg.info_bits).map(|_| rng.random_range(0..2u8)).collect();
        let msg = BitBlock::message(info.clone())?;
        let block = match &self.crc {
            Some(spec) => crc_attach(&msg, spec, self.cfg.code.crc_length)?,
            None => msg,
        };
        Ok((info, block))
    }

    fn encode(&self, block: &BitBlock) -> Result<BitBlock> {
        Ok(if self.cfg.code.interleaved {
            cc_encode_swept(block, &self.scheme.code)?
        } else {
            cc_encode(block, &self.scheme.code)?
        })
    }

    fn score(&self, input: DecoderInput<'_>, info: &[u8]) -> Result<Counts> {
        let (decoded, _) = self.decoder.decode(input, self.cfg.code.interleaved)?;
        let errors = u64::from(decoded.bits()[..info.len()] != *info);
        let crc_failures = match &self.crc {
            Some(spec) => {
                let block = BitBlock::new(decoded.into_bits(), BlockRole::MessageWithCrc)?;
                u64::from(!crc_check(&block, spec, self.cfg.code.crc_length)?)
            }
            None => 0,
        };
        Ok(Counts {
            blocks: 1,
            errors,
            crc_failures,
        })
    }

    fn channel(&self, rng: &mut SmallRng) -> (ChannelRealization, ChannelRealization) {
        let ch = &self.cfg.channel;
        let h1 = realize_with(ch.profile, ch.delay_spread, self.doppler, rng);
        let h2 = realize_with(ch.profile, ch.delay_spread, self.doppler, rng);
        (h1, h2)
    }

    /// One Monte-Carlo trial (one block per user).
    pub fn trial(&self, snr_db: f64, seed: u64) -> Result<Counts> {
        match &self.scheme.kind {
            SchemeKind::CodedBpsk => self.coded_bpsk(self.snr(snr_db), seed),
            SchemeKind::Pdrch(link) => self.pdrch(link, self.snr(snr_db), seed),
            SchemeKind::Fdma { .. } => self.fdma(self.snr(snr_db), seed),
        }
    }

    fn coded_bpsk(&self, snr: Option<f64>, seed: u64) -> Result<Counts> {
        let (info, block) = self.message(&mut stream_rng(seed, Stream::Message))?;
        let coded = self.encode(&block)?;
        let mut rng = stream_rng(seed, Stream::Noise);
        let llrs: Vec<f64> = match snr {
            Some(snr) => {
                let es_n0 = 10f64.powf(snr / 10.0);
                let sd = (0.5 / es_n0).sqrt();
                coded
                    .bits()
                    .iter()
                    .map(|&c| {
                        let n: f64 = rng.sample(StandardNormal);
                        4.0 * es_n0 * (1.0 - 2.0 * f64::from(c) + sd * n)
                    })
                    .collect()
            }
            None => coded.bits().iter().map(|&c| 1.0 - 2.0 * f64::from(c)).collect(),
        };
        self.score(DecoderInput::Soft(&LlrBlock::new(llrs, 1.0)?), &info)
    }

    /// Transmitted coefficients, both channel draws and the noisy reader input.
    pub fn pdrch_waveform(
        &self,
        link: &LinkSetup,
        snr: Option<f64>,
        seed: u64,
    ) -> Result<(Vec<u8>, SampleWaveform, ChannelRealization, ChannelRealization, SampleWaveform, f64)> {
        let (info, block) = self.message(&mut stream_rng(seed, Stream::Message))?;
        let coded = self.encode(&block)?;
        let chips = link.waveform.modulate(&coded)?;
        let coeffs = backscatter_apply(&chips, &link.map, link.sample_rate)?;
        let (h1, h2) = self.channel(&mut stream_rng(seed, Stream::Channel));
        let mut rx = backscatter_cascade(&coeffs, &h1, &h2, &self.cfg.channel.cascade);
        let p_ref = coeffs.power() * self.inband[0] * link.sample_rate / link.waveform.bit_rate();
        let var = add_awgn(&mut rx, snr, p_ref, &mut stream_rng(seed, Stream::Noise))?;
        // noiseless runs still need a positive scale for the metrics
        let var = if var > 0.0 { var } else { p_ref * 1e-6 };
        Ok((info, coeffs, h1, h2, rx, var))
    }

    fn pdrch(&self, link: &LinkSetup, snr: Option<f64>, seed: u64) -> Result<Counts> {
        let (info, _, h1, h2, rx, var) = self.pdrch_waveform(link, snr, seed)?;
        let n_bits = self.scheme.code.codeword_len(self.cfg.info_bits + self.cfg.code.crc_length);
        self.receive(&rx, &link.waveform, link, &h1, &h2, 0.0, var, n_bits, &info)
    }

    #[allow(clippy::too_many_arguments)]
    fn receive(
        &self,
        rx: &SampleWaveform,
        w: &D2rWaveform,
        link: &LinkSetup,
        h1: &ChannelRealization,
        h2: &ChannelRealization,
        eps: f64,
        noise_var: f64,
        n_bits: usize,
        info: &[u8],
    ) -> Result<Counts> {
        let branches = extract_user(rx, w, eps, &link.rx)?;
        match link.rx.mode {
            ReceiverMode::CoherentSoft => {
                let genie = Genie {
                    gains: cascade_gains(&branches, h1, h2, link.sample_rate),
                    noise_var,
                    eps,
                    sample_rate: link.sample_rate,
                };
                let llrs = coherent_llrs(&branches, w, &link.map, &genie, n_bits)?;
                self.score(DecoderInput::Soft(&llrs), info)
            }
            ReceiverMode::NoncoherentHard => {
                let bits = noncoherent_bits(&branches, w, eps, n_bits, link.rx.pattern_window)?;
                self.score(DecoderInput::Hard(&bits), info)
            }
        }
    }

    /// Superposed reader input of all FDMA users, with each user's clock error.
    pub fn fdma_waveform(&self, snr: Option<f64>, seed: u64) -> Result<FdmaTrial> {
        let SchemeKind::Fdma {
            users,
            map,
            sample_rate,
            sfo_ppm,
            ..
        } = &self.scheme.kind
        else {
            return Err(SimError::config("experiment", "not an FDMA scheme"));
        };
        let mut msg_rng = stream_rng(seed, Stream::Message);
        let mut ch_rng = stream_rng(seed, Stream::Channel);
        let mut clock_rng = stream_rng(seed, Stream::Clock);
        let sfo = SfoModel::new(*sfo_ppm);
        let mut infos = Vec::with_capacity(users.len());
        let mut eps = Vec::with_capacity(users.len());
        let mut chips = Vec::with_capacity(users.len());
        for w in users {
            let (info, block) = self.message(&mut msg_rng)?;
            let coded = self.encode(&block)?;
            let e = sfo.draw(&mut clock_rng);
            chips.push(stretch(w.modulate(&coded)?, e));
            infos.push(info);
            eps.push(e);
        }
        let len = chips
            .iter()
            .map(|c| (c.duration() * sample_rate).ceil() as usize)
            .max()
            .unwrap_or(0);
        let mut links = Vec::with_capacity(users.len());
        for c in &chips {
            let (h_cw2d, h_d2r) = self.channel(&mut ch_rng);
            links.push(UserLink {
                coeffs: backscatter_render(c, map, *sample_rate, len),
                h_cw2d,
                h_d2r,
            });
        }
        let mut rx = fdma_superpose(&links, &self.cfg.channel.cascade)?;
        let p_tx = links
            .iter()
            .zip(&self.inband)
            .map(|(l, s)| l.coeffs.power() * s)
            .sum::<f64>()
            / links.len() as f64;
        let p_ref = p_tx * sample_rate / users[0].bit_rate();
        let var = add_awgn(&mut rx, snr, p_ref, &mut stream_rng(seed, Stream::Noise))?;
        let noise_var = if var > 0.0 { var } else { p_ref * 1e-6 };
        Ok(FdmaTrial {
            infos,
            eps,
            links,
            rx,
            noise_var,
        })
    }

    fn fdma(&self, snr: Option<f64>, seed: u64) -> Result<Counts> {
        let SchemeKind::Fdma {
            users,
            map,
            rx: rx_cfg,
            sample_rate,
            ..
        } = &self.scheme.kind
        else {
            unreachable!("fdma trial on a non-FDMA scheme")
        };
        let t = self.fdma_waveform(snr, seed)?;
        let n_bits = self.scheme.code.codeword_len(self.cfg.info_bits + self.cfg.code.crc_length);
        let mut total = Counts::default();
        for (k, w) in users.iter().enumerate() {
            let link = LinkSetup {
                waveform: *w,
                map: *map,
                rx: rx_cfg.clone(),
                sample_rate: *sample_rate,
            };
            let l = &t.links[k];
            total = total + self.receive(&t.rx, w, &link, &l.h_cw2d, &l.h_d2r, t.eps[k], t.noise_var, n_bits, &t.infos[k])?;
        }
        Ok(total)
    }
}

/// One FDMA trial before reception.
pub struct FdmaTrial {
    pub infos: Vec<Vec<u8>>,
    pub eps: Vec<f64>,
    pub links: Vec<UserLink>,
    pub rx: SampleWaveform,
    pub noise_var: f64,
}

/// Run one SNR point of one scheme until the stop rule fires.
pub fn run_point(ctx: &TrialContext<'_>, snr_index: usize, snr_db: f64) -> Result<Counts> {
    let stop = &ctx.cfg.stop;
    let mut acc = Counts::default();
    let mut next = 0u64;
    while acc.errors < stop.min_block_errors && next < stop.max_trials {
        let end = (next + stop.batch).min(stop.max_trials);
        let batch = (next..end)
            .into_par_iter()
            .map(|t| ctx.trial(snr_db, trial_seed(ctx.cfg.seed, snr_index, t)))
            .try_reduce(Counts::default, |a, b| Ok(a + b))?;
        acc = acc + batch;
        next = end;
    }
    Ok(acc)
}

pub fn run_scheme(cfg: &ExperimentConfig, scheme: &Scheme, opts: &RunOptions) -> Result<Vec<BlerRecord>> {
    let ctx = TrialContext::new(cfg, scheme);
    let snr_def = match cfg.experiment {
        ExperimentKind::CcAwgn => SNR_DEF_CODEC,
        _ => SNR_DEF_LINK,
    };
    let mut out = Vec::new();
    for (i, &snr) in cfg.snr_grid.iter().enumerate() {
        let t0 = Instant::now();
        let c = run_point(&ctx, i, snr)?;
        let bler = c.errors as f64 / c.blocks as f64;
        out.push(BlerRecord {
            experiment: cfg.name.clone(),
            scheme_label: scheme.label.clone(),
            snr_db: snr,
            trials: c.blocks,
            block_errors: c.errors,
            bler,
            wall_seconds: if opts.timing { t0.elapsed().as_secs_f64() } else { 0.0 },
            seed: cfg.seed,
            snr_def: snr_def.to_string(),
            crc_failures: (cfg.code.crc_length > 0).then_some(c.crc_failures),
        });
        if cfg.stop.min_bler.is_some_and(|m| bler < m) {
            break;
        }
    }
    Ok(out)
}

/// Every curve of the experiment, in scheme order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<BlerRecord>> {
    let schemes = resolve(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| SimError::config("workers", e.to_string()))?;
    pool.install(|| {
        let mut out = Vec::new();
        for s in &schemes {
            out.extend(run_scheme(cfg, s, opts)?);
        }
        Ok(out)
    })
}
