//! Photon-correlation toolkit: a synthetic pulsed-source timetag
//! generator (target g²₀, detector jitter, optical cross-talk) and the
//! coincidence-histogram → peak-integration → side-peak-normalization
//! analyzer with its uncertainty estimate. Timetags are integer
//! picoseconds; statistics are f64 throughout.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_REP_PERIOD_PS: i64 = 12_500;
pub const DEFAULT_BIN_WIDTH_PS: i64 = 87;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    A,
    B,
}

impl Channel {
    fn opposite(self) -> Self {
        match self {
            Channel::A => Channel::B,
            Channel::B => Channel::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossTalk {
    /// Reflection-path delay of the spurious opposite-channel click, ps.
    pub delay_ps: i64,
    pub probability: f64,
}

/// Generator settings for one synthetic stream.
#[derive(Debug, Clone, Serialize)]
pub struct StreamParams {
    pub n_pulses: u64,
    /// Per-arm click probability per pulse.
    pub p_click: f64,
    pub g2_target: f64,
    /// Total pair-delay standard deviation, ps (each click is smeared by
    /// σ/√2 so the A−B delay distribution has standard deviation σ).
    pub jitter_sigma_ps: f64,
    pub crosstalk: Vec<CrossTalk>,
    pub seed: u64,
    pub rep_period_ps: i64,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self {
            n_pulses: 1_000_000,
            p_click: 0.01,
            g2_target: 1.0,
            jitter_sigma_ps: 300.0,
            crosstalk: vec![
                CrossTalk {
                    delay_ps: 9_500,
                    probability: 0.005,
                },
                CrossTalk {
                    delay_ps: 114_000,
                    probability: 0.005,
                },
            ],
            seed: 1,
            rep_period_ps: DEFAULT_REP_PERIOD_PS,
        }
    }
}

/// A time-sorted two-channel click record.
#[derive(Debug, Clone)]
pub struct TimetagStream {
    pub events: Vec<(Channel, i64)>,
    pub rep_period_t: i64,
    pub duration: i64,
    pub params: StreamParams,
}

/// Synthesize a pulsed two-arm stream: per pulse the joint same-pulse
/// click probability is g2·p², marginals are p on each arm; click times
/// are Gaussian-smeared; every click can spawn one cross-talk click on the
/// opposite channel at a fixed positive delay. Deterministic per seed.
pub fn generate_stream(params: &StreamParams) -> Result<TimetagStream> {
    let p = params.p_click;
    if !(0.0..0.2).contains(&p) || p <= 0.0 {
        return Err(Error::Domain("p_click must be small and positive".into()));
    }
    if params.g2_target < 0.0 {
        return Err(Error::Domain("g2_target must be >= 0".into()));
    }
    let p_ab = params.g2_target * p * p;
    let p_single = p - p_ab;
    if p_ab > p || p_ab + 2.0 * p_single > 1.0 {
        return Err(Error::Domain(format!(
            "invalid joint probability: g2·p² = {p_ab} with p = {p}"
        )));
    }
    for ct in &params.crosstalk {
        if !(0.0..=1.0).contains(&ct.probability) || ct.delay_ps <= 0 {
            return Err(Error::Domain("cross-talk needs delay > 0, p in [0,1]".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let jitter = Normal::new(0.0, params.jitter_sigma_ps / 2.0f64.sqrt())
        .map_err(|e| Error::Domain(format!("bad jitter sigma: {e}")))?;
    let t_rep = params.rep_period_ps;
    let duration = params.n_pulses as i64 * t_rep;
    let mut events: Vec<(Channel, i64)> = Vec::new();
    let spawn = |events: &mut Vec<(Channel, i64)>,
                     rng: &mut ChaCha8Rng,
                     ch: Channel,
                     base: i64| {
        let t = base + jitter.sample(rng).round() as i64;
        if (0..=duration).contains(&t) {
            events.push((ch, t));
        }
        for ct in &params.crosstalk {
            if rng.gen::<f64>() < ct.probability {
                let tc = base + ct.delay_ps + jitter.sample(rng).round() as i64;
                if (0..=duration).contains(&tc) {
                    events.push((ch.opposite(), tc));
                }
            }
        }
    };
    for k in 0..params.n_pulses {
        let u: f64 = rng.gen();
        let base = k as i64 * t_rep;
        if u < p_ab {
            spawn(&mut events, &mut rng, Channel::A, base);
            spawn(&mut events, &mut rng, Channel::B, base);
        } else if u < p_ab + p_single {
            spawn(&mut events, &mut rng, Channel::A, base);
        } else if u < p_ab + 2.0 * p_single {
            spawn(&mut events, &mut rng, Channel::B, base);
        }
    }
    events.sort_by_key(|e| e.1);
    Ok(TimetagStream {
        events,
        rep_period_t: t_rep,
        duration,
        params: params.clone(),
    })
}

/// Binned A–B delay counts with the per-peak integration windows.
#[derive(Debug, Clone)]
pub struct CoincidenceHistogram {
    pub bin_width: i64,
    /// Delay of the left edge of bin 0, ps.
    pub tau_min: i64,
    pub counts: Vec<u64>,
    pub rep_period_t: i64,
    pub max_order: i32,
    /// Half-width of each peak integration window (default T/4, giving a
    /// total window of T/2 centred on mT).
    pub window_half: i64,
}

impl CoincidenceHistogram {
    /// Integrated counts of the order-m peak window (bins whose centre
    /// lies within mT ± window_half).
    pub fn peak_integral(&self, m: i32) -> u64 {
        let center = m as i64 * self.rep_period_t;
        let lo = center - self.window_half;
        let hi = center + self.window_half;
        let mut total = 0u64;
        for (i, &c) in self.counts.iter().enumerate() {
            let mid = self.tau_min + i as i64 * self.bin_width + self.bin_width / 2;
            if mid >= lo && mid <= hi {
                total += c;
            }
        }
        total
    }

    pub fn total_coincidences(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin every A–B pair with |τ| ≤ (max_order + ½)T, τ = t_B − t_A.
pub fn build_histogram(
    stream: &TimetagStream,
    bin_width: i64,
    max_order: i32,
) -> Result<CoincidenceHistogram> {
    if stream.events.is_empty() {
        return Err(Error::Domain("empty timetag stream".into()));
    }
    if bin_width <= 0 || max_order < 1 {
        return Err(Error::Domain("bin_width > 0 and max_order >= 1 required".into()));
    }
    let t_rep = stream.rep_period_t;
    let tau_max = max_order as i64 * t_rep + t_rep / 2;
    let n_bins = (2 * tau_max / bin_width + 1) as usize;
    let tau_min = -tau_max;
    let mut counts = vec![0u64; n_bins];
    let a_times: Vec<i64> = stream
        .events
        .iter()
        .filter(|e| e.0 == Channel::A)
        .map(|e| e.1)
        .collect();
    let b_times: Vec<i64> = stream
        .events
        .iter()
        .filter(|e| e.0 == Channel::B)
        .map(|e| e.1)
        .collect();
    let mut lo = 0usize;
    for &ta in &a_times {
        while lo < b_times.len() && b_times[lo] < ta - tau_max {
            lo += 1;
        }
        for &tb in &b_times[lo..] {
            let tau = tb - ta;
            if tau > tau_max {
                break;
            }
            let idx = ((tau - tau_min) / bin_width) as usize;
            if idx < n_bins {
                counts[idx] += 1;
            }
        }
    }
    Ok(CoincidenceHistogram {
        bin_width,
        tau_min,
        counts,
        rep_period_t: t_rep,
        max_order,
        window_half: t_rep / 4,
    })
}

/// Peak-masking policy for the side-peak statistics.
#[derive(Debug, Clone)]
pub enum MaskSpec {
    /// Flag side peaks deviating > 5σ from the median (iterated), plus the
    /// peaks containing the listed known cross-talk delays (±).
    Auto { known_crosstalk_delays_ps: Vec<i64> },
    /// Mask exactly these peak orders.
    Explicit(Vec<i32>),
}

impl MaskSpec {
    /// Auto-masking with the default reflection delays.
    pub fn auto_default() -> Self {
        MaskSpec::Auto {
            known_crosstalk_delays_ps: vec![9_500, 114_000],
        }
    }
}

/// g²₀ = C/S estimate with the side-peak-fluctuation uncertainty.
#[derive(Debug, Clone, Serialize)]
pub struct G2Estimate {
    /// Central (m = 0) integrated counts.
    pub c: f64,
    /// Mean unmasked side-peak counts.
    pub s: f64,
    /// Standard deviation of the unmasked side peaks.
    pub sigma_s: f64,
    pub n_side: usize,
    pub g2_0: f64,
    /// √((σ_S/S)² + (C·σ_S/(S²√N))²).
    pub uncertainty: f64,
    /// (peak order, reason) for every masked side peak.
    pub masked_m: Vec<(i32, String)>,
}

/// Estimate g²₀ from the histogram: C is the m = 0 window, S and σ_S come
/// from the unmasked side peaks.
pub fn estimate_g2(hist: &CoincidenceHistogram, mask: &MaskSpec) -> Result<G2Estimate> {
    let orders: Vec<i32> = (-hist.max_order..=hist.max_order)
        .filter(|&m| m != 0)
        .collect();
    let sums: Vec<(i32, f64)> = orders
        .iter()
        .map(|&m| (m, hist.peak_integral(m) as f64))
        .collect();
    let mut masked: Vec<(i32, String)> = Vec::new();
    match mask {
        MaskSpec::Explicit(list) => {
            for &m in list {
                masked.push((m, "explicit mask".into()));
            }
        }
        MaskSpec::Auto {
            known_crosstalk_delays_ps,
        } => {
            for &d in known_crosstalk_delays_ps {
                let m = ((d as f64) / hist.rep_period_t as f64).round() as i32;
                let center = m as i64 * hist.rep_period_t;
                if (d - center).abs() <= hist.window_half && m != 0 && m.abs() <= hist.max_order {
                    masked.push((m, format!("known cross-talk delay {d} ps")));
                    masked.push((-m, format!("known cross-talk delay -{d} ps")));
                }
            }
            // iterated 5σ outlier flag against the median of the survivors
            loop {
                let live: Vec<(i32, f64)> = sums
                    .iter()
                    .filter(|(m, _)| !masked.iter().any(|(mm, _)| mm == m))
                    .cloned()
                    .collect();
                if live.len() < 5 {
                    break;
                }
                let mut vals: Vec<f64> = live.iter().map(|x| x.1).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = vals[vals.len() / 2];
                // robust scale: scaled median absolute deviation, floored by
                // the Poisson width so identical or near-identical peaks do
                // not make the threshold collapse
                let mut devs: Vec<f64> = vals.iter().map(|v| (v - median).abs()).collect();
                devs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mad = devs[devs.len() / 2];
                let sigma = (1.4826 * mad).max(median.max(1.0).sqrt());
                let worst = live
                    .iter()
                    .max_by(|a, b| {
                        (a.1 - median).abs().partial_cmp(&(b.1 - median).abs()).unwrap()
                    })
                    .unwrap();
                if (worst.1 - median).abs() > 5.0 * sigma {
                    masked.push((worst.0, format!("{:.1}σ outlier", (worst.1 - median).abs() / sigma)));
                } else {
                    break;
                }
            }
        }
    }
    let live: Vec<f64> = sums
        .iter()
        .filter(|(m, _)| !masked.iter().any(|(mm, _)| mm == m))
        .map(|x| x.1)
        .collect();
    if live.len() < 5 {
        return Err(Error::Statistics(format!(
            "only {} unmasked side peaks; need >= 5",
            live.len()
        )));
    }
    let n = live.len() as f64;
    let s = live.iter().sum::<f64>() / n;
    if s <= 0.0 {
        return Err(Error::Statistics("empty side peaks".into()));
    }
    let sigma_s = (live.iter().map(|v| (v - s).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let c = hist.peak_integral(0) as f64;
    let g2_0 = c / s;
    let uncertainty =
        ((sigma_s / s).powi(2) + (c * sigma_s / (s * s * n.sqrt())).powi(2)).sqrt();
    Ok(G2Estimate {
        c,
        s,
        sigma_s,
        n_side: live.len(),
        g2_0,
        uncertainty,
        masked_m: masked,
    })
}

/// Block bootstrap over pulse blocks: resample per-block histograms with
/// replacement and report (mean, std) of the g²₀ replicates. Pairs
/// spanning a block boundary are dropped, a negligible loss for blocks
/// much longer than max_order pulses.
pub fn bootstrap_g2(
    stream: &TimetagStream,
    bin_width: i64,
    max_order: i32,
    block_pulses: u64,
    n_replicates: usize,
    mask: &MaskSpec,
    seed: u64,
) -> Result<(f64, f64)> {
    if block_pulses < 100 * max_order as u64 {
        return Err(Error::Domain(
            "blocks must be much longer than the correlation order".into(),
        ));
    }
    let block_len = block_pulses as i64 * stream.rep_period_t;
    let n_blocks = (stream.duration / block_len + 1) as usize;
    // template histogram for the bin layout
    let template = build_histogram(stream, bin_width, max_order)?;
    let n_bins = template.counts.len();
    let tau_max = -template.tau_min;
    let mut block_counts = vec![vec![0u64; n_bins]; n_blocks];
    let mut a_by_block: Vec<Vec<i64>> = vec![Vec::new(); n_blocks];
    let mut b_by_block: Vec<Vec<i64>> = vec![Vec::new(); n_blocks];
    for &(ch, t) in &stream.events {
        let blk = (t / block_len) as usize;
        match ch {
            Channel::A => a_by_block[blk].push(t),
            Channel::B => b_by_block[blk].push(t),
        }
    }
    for blk in 0..n_blocks {
        let (aa, bb) = (&a_by_block[blk], &b_by_block[blk]);
        let mut lo = 0usize;
        for &ta in aa {
            while lo < bb.len() && bb[lo] < ta - tau_max {
                lo += 1;
            }
            for &tb in &bb[lo..] {
                let tau = tb - ta;
                if tau > tau_max {
                    break;
                }
                let idx = ((tau - template.tau_min) / bin_width) as usize;
                if idx < n_bins {
                    block_counts[blk][idx] += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut replicates = Vec::with_capacity(n_replicates);
    let mut hist = template.clone();
    for _ in 0..n_replicates {
        let mut counts = vec![0u64; n_bins];
        for _ in 0..n_blocks {
            let pick = rng.gen_range(0..n_blocks);
            for (c, &b) in counts.iter_mut().zip(&block_counts[pick]) {
                *c += b;
            }
        }
        hist.counts = counts;
        replicates.push(estimate_g2(&hist, mask)?.g2_0);
    }
    let n = replicates.len() as f64;
    let mean = replicates.iter().sum::<f64>() / n;
    let var = replicates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Write the stream as CSV: header `channel,time_ps`, one event per line.
pub fn write_timetags<W: Write>(stream: &TimetagStream, mut w: W) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Config(format!("timetag write: {e}"));
    writeln!(w, "channel,time_ps").map_err(io_err)?;
    for &(ch, t) in &stream.events {
        let c = match ch {
            Channel::A => 'A',
            Channel::B => 'B',
        };
        writeln!(w, "{c},{t}").map_err(io_err)?;
    }
    Ok(())
}

/// Read a timetag CSV produced by [`write_timetags`] (or real hardware
/// exports with the same columns).
pub fn read_timetags<Rd: BufRead>(r: Rd, rep_period_ps: i64) -> Result<TimetagStream> {
    let mut events = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Config(format!("timetag read: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("channel") {
            continue;
        }
        let (ch, t) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'channel,time_ps'", lineno + 1)))?;
        let ch = match ch.trim() {
            "A" => Channel::A,
            "B" => Channel::B,
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown channel '{other}'",
                    lineno + 1
                )))
            }
        };
        let t: i64 = t
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("line {}: bad time: {e}", lineno + 1)))?;
        events.push((ch, t));
    }
    if events.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::Config("timetags must be time-sorted".into()));
    }
    let duration = events.last().map_or(0, |e| e.1);
    Ok(TimetagStream {
        events,
        rep_period_t: rep_period_ps,
        duration,
        params: StreamParams {
            n_pulses: (duration / rep_period_ps.max(1)) as u64,
            ..StreamParams::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean_params(n_pulses: u64, g2: f64, seed: u64) -> StreamParams {
        StreamParams {
            n_pulses,
            g2_target: g2,
            jitter_sigma_ps: 0.0,
            crosstalk: vec![],
            seed,
            ..StreamParams::default()
        }
    }

    #[test]
    fn poissonian_source_has_flat_peaks() {
        let stream = generate_stream(&clean_params(1_000_000, 1.0, 7)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 8).unwrap();
        let est = estimate_g2(&hist, &MaskSpec::Explicit(vec![])).unwrap();
        // central and side peaks agree within 3 sigma
        assert!(
            (est.c - est.s).abs() < 3.0 * est.sigma_s.max(est.s.sqrt()),
            "C = {}, S = {}, σ = {}",
            est.c,
            est.s,
            est.sigma_s
        );
        assert!((est.g2_0 - 1.0).abs() < 3.0 * est.uncertainty);
    }

    #[test]
    fn perfect_blockade_has_empty_center() {
        let stream = generate_stream(&clean_params(500_000, 0.0, 3)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 6).unwrap();
        assert_eq!(hist.peak_integral(0), 0);
        assert!(hist.peak_integral(1) > 0);
    }

    #[test]
    fn side_peak_width_tracks_jitter() {
        let params = StreamParams {
            n_pulses: 2_000_000,
            jitter_sigma_ps: 300.0,
            crosstalk: vec![],
            seed: 11,
            ..StreamParams::default()
        };
        let stream = generate_stream(&params).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 3).unwrap();
        // moment-based width of the m = 1 peak
        let t = hist.rep_period_t;
        let (mut w_sum, mut t1, mut t2) = (0.0, 0.0, 0.0);
        for (i, &c) in hist.counts.iter().enumerate() {
            let mid = (hist.tau_min + i as i64 * hist.bin_width + hist.bin_width / 2) as f64;
            let d = mid - t as f64;
            if d.abs() < (t / 4) as f64 && c > 0 {
                let cf = c as f64;
                w_sum += cf;
                t1 += cf * d;
                t2 += cf * d * d;
            }
        }
        let mean = t1 / w_sum;
        let sigma = (t2 / w_sum - mean * mean).sqrt();
        let fwhm = 2.0 * (2.0f64.ln() * 2.0).sqrt() * sigma;
        assert!((fwhm - 700.0).abs() / 700.0 < 0.10, "FWHM = {fwhm}");
    }

    #[test]
    fn single_pair_lands_in_one_bin() {
        let stream = TimetagStream {
            events: vec![(Channel::A, 50_000), (Channel::B, 50_100)],
            rep_period_t: DEFAULT_REP_PERIOD_PS,
            duration: 100_000,
            params: StreamParams::default(),
        };
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 2).unwrap();
        assert_eq!(hist.total_coincidences(), 1);
        let idx = ((100 - hist.tau_min) / hist.bin_width) as usize;
        assert_eq!(hist.counts[idx], 1);
    }

    #[test]
    fn side_peaks_pass_uniformity_chi2() {
        let stream = generate_stream(&clean_params(1_000_000, 1.0, 19)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).unwrap();
        let sums: Vec<f64> = (-10..=10)
            .filter(|&m| m != 0)
            .map(|m| hist.peak_integral(m) as f64)
            .collect();
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        let chi2: f64 = sums.iter().map(|s| (s - mean).powi(2) / mean).sum();
        // dof = 19; 95% quantile of χ²(19)
        let dist = statrs::distribution::ChiSquared::new(19.0).unwrap();
        let q95 = statrs::distribution::ContinuousCDF::inverse_cdf(&dist, 0.95);
        assert!(chi2 < q95, "χ² = {chi2}, 95% bound = {q95}");
    }

    #[test]
    fn crosstalk_excess_is_auto_masked() {
        let params = StreamParams {
            n_pulses: 2_000_000,
            crosstalk: vec![CrossTalk {
                delay_ps: 9_500,
                probability: 0.01,
            }],
            jitter_sigma_ps: 0.0,
            seed: 23,
            ..StreamParams::default()
        };
        let stream = generate_stream(&params).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).unwrap();
        // purely statistical auto-masking must find the anomaly at m = ±1
        let est = estimate_g2(
            &hist,
            &MaskSpec::Auto {
                known_crosstalk_delays_ps: vec![],
            },
        )
        .unwrap();
        assert!(
            est.masked_m.iter().any(|(m, _)| m.abs() == 1),
            "masks: {:?}",
            est.masked_m
        );
        assert!((est.g2_0 - 1.0).abs() < 3.0 * est.uncertainty, "g2 = {}", est.g2_0);
    }

    #[test]
    fn masking_changes_only_side_statistics() {
        let stream = generate_stream(&clean_params(500_000, 0.9, 31)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).unwrap();
        let all = estimate_g2(&hist, &MaskSpec::Explicit(vec![])).unwrap();
        let some = estimate_g2(&hist, &MaskSpec::Explicit(vec![3, -4])).unwrap();
        assert_eq!(all.c, some.c);
        assert_eq!(some.n_side, all.n_side - 2);
        assert!(all.s != some.s || all.sigma_s != some.sigma_s);
    }

    #[test]
    fn hand_built_identical_peaks_give_exact_ratio() {
        // equal counts in every side window, half in the centre
        let t = DEFAULT_REP_PERIOD_PS;
        let mut events = Vec::new();
        // one A click at every pulse; B clicks paired at offsets to land
        // exactly in chosen windows is fiddly -- instead build the
        // histogram directly
        events.push((Channel::A, 0));
        let stream = TimetagStream {
            events,
            rep_period_t: t,
            duration: t,
            params: StreamParams::default(),
        };
        let mut hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 6).unwrap();
        hist.counts.iter_mut().for_each(|c| *c = 0);
        let set = |hist: &mut CoincidenceHistogram, m: i32, v: u64| {
            let idx = ((m as i64 * t - hist.tau_min) / hist.bin_width) as usize;
            hist.counts[idx] = v;
        };
        for m in -6..=6 {
            set(&mut hist, m, if m == 0 { 50 } else { 100 });
        }
        let est = estimate_g2(&hist, &MaskSpec::Explicit(vec![])).unwrap();
        assert_eq!(est.sigma_s, 0.0);
        assert_eq!(est.uncertainty, 0.0);
        assert!((est.g2_0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_translation_and_swap() {
        let stream = generate_stream(&clean_params(300_000, 0.9, 5)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 8).unwrap();
        let base = estimate_g2(&hist, &MaskSpec::Explicit(vec![])).unwrap();
        // global translation
        let shifted = TimetagStream {
            events: stream.events.iter().map(|&(c, t)| (c, t + 1_000_000)).collect(),
            duration: stream.duration + 1_000_000,
            ..stream.clone()
        };
        let h2 = build_histogram(&shifted, DEFAULT_BIN_WIDTH_PS, 8).unwrap();
        let est2 = estimate_g2(&h2, &MaskSpec::Explicit(vec![])).unwrap();
        assert_eq!(base.g2_0, est2.g2_0);
        // channel swap mirrors the histogram; the estimate is unchanged
        let swapped = TimetagStream {
            events: stream
                .events
                .iter()
                .map(|&(c, t)| (c.opposite(), t))
                .collect(),
            ..stream.clone()
        };
        let h3 = build_histogram(&swapped, DEFAULT_BIN_WIDTH_PS, 8).unwrap();
        let est3 = estimate_g2(&h3, &MaskSpec::Explicit(vec![])).unwrap();
        assert!((base.g2_0 - est3.g2_0).abs() < 1e-12);
        assert_eq!(base.c, est3.c);
    }

    #[test]
    fn round_trip_is_unbiased_over_seeds() {
        let mut sum = 0.0;
        let mut var_sum = 0.0;
        let n_seeds = 20;
        for seed in 0..n_seeds {
            let stream = generate_stream(&clean_params(2_000_000, 0.9, 500 + seed)).unwrap();
            let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).unwrap();
            let est = estimate_g2(&hist, &MaskSpec::Explicit(vec![])).unwrap();
            sum += est.g2_0;
            var_sum += est.uncertainty.powi(2);
        }
        let mean = sum / n_seeds as f64;
        let combined_se = (var_sum / (n_seeds as f64).powi(2)).sqrt();
        assert!(
            (mean - 0.9).abs() < combined_se,
            "mean = {mean}, se = {combined_se}"
        );
    }

    #[test]
    fn bootstrap_validates_quoted_uncertainty() {
        let stream = generate_stream(&clean_params(1_000_000, 0.94, 77)).unwrap();
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).unwrap();
        let mask = MaskSpec::Explicit(vec![]);
        let est = estimate_g2(&hist, &mask).unwrap();
        let (_, boot_sigma) =
            bootstrap_g2(&stream, DEFAULT_BIN_WIDTH_PS, 10, 10_000, 200, &mask, 42).unwrap();
        assert!(
            (boot_sigma - est.uncertainty).abs() / est.uncertainty < 0.25,
            "bootstrap {boot_sigma} vs quoted {}",
            est.uncertainty
        );
    }

    #[test]
    fn csv_round_trip() {
        let stream = generate_stream(&clean_params(10_000, 1.0, 9)).unwrap();
        let mut buf = Vec::new();
        write_timetags(&stream, &mut buf).unwrap();
        let back = read_timetags(std::io::Cursor::new(&buf), DEFAULT_REP_PERIOD_PS).unwrap();
        assert_eq!(stream.events, back.events);
    }

    #[test]
    fn rejects_invalid_probabilities() {
        let mut p = clean_params(100, 1.0, 1);
        p.p_click = 0.0;
        assert!(generate_stream(&p).is_err());
        let mut p = clean_params(100, 1.0, 1);
        p.g2_target = -0.1;
        assert!(generate_stream(&p).is_err());
        let mut p = clean_params(100, 1.0, 1);
        p.p_click = 0.15;
        p.g2_target = 60.0; // g2 p^2 > p
        assert!(generate_stream(&p).is_err());
    }
}
