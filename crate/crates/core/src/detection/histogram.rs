use serde::{Deserialize, Serialize};

use super::ClickRecord;
use crate::error::{ensure, Error, Result};

pub const DEFAULT_BIN_WIDTH_PS: f64 = 10.0;
pub const DEFAULT_RANGE_PS: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramMeta {
    pub label: String,
    pub seed: u64,
    pub config_hash: String,
    /// Pulse spacing used to locate side peaks (ps); zero if unknown.
    pub pulse_period_ps: f64,
}

/// Counts of detector-1 minus detector-2 time differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub bin_width_ps: f64,
    /// Half-width of the covered delay range; bins span [-range, range).
    pub range_ps: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub total_pairs: u64,
    pub meta: HistogramMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    /// Width covered by whole bins, which may exceed the requested window.
    pub window_ps: f64,
    pub visibility: f64,
    pub stderr: f64,
    pub n_res: u64,
    pub n_ref: u64,
}

impl CoincidenceHistogram {
    pub fn new(bin_width_ps: f64, range_ps: f64, meta: HistogramMeta) -> Result<Self> {
        ensure(
            bin_width_ps > 0.0 && bin_width_ps.is_finite(),
            "bin_width_ps",
            bin_width_ps,
            "bin_width_ps > 0",
        )?;
        ensure(
            range_ps >= bin_width_ps && range_ps.is_finite(),
            "range_ps",
            range_ps,
            &format!("range_ps >= bin_width_ps = {bin_width_ps}"),
        )?;
        let half_bins = range_ps / bin_width_ps;
        ensure(
            (half_bins - half_bins.round()).abs() < 1e-9 * half_bins,
            "range_ps",
            range_ps,
            &format!("an integer multiple of bin_width_ps = {bin_width_ps}"),
        )?;
        let n = 2 * half_bins.round() as usize;
        Ok(Self {
            bin_width_ps,
            range_ps,
            counts: vec![0; n],
            overflow: 0,
            total_pairs: 0,
            meta,
        })
    }

    pub fn with_defaults(meta: HistogramMeta) -> Self {
        Self::new(DEFAULT_BIN_WIDTH_PS, DEFAULT_RANGE_PS, meta).expect("defaults are valid")
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        -self.range_ps + (i as f64 + 0.5) * self.bin_width_ps
    }

    pub fn record(&mut self, tau_ps: f64) {
        self.total_pairs += 1;
        let idx = ((tau_ps + self.range_ps) / self.bin_width_ps).floor();
        if idx >= 0.0 && (idx as usize) < self.counts.len() {
            self.counts[idx as usize] += 1;
        } else {
            self.overflow += 1;
        }
    }

    /// Records every detector-1/detector-2 pair among `clicks`.
    pub fn record_clicks(&mut self, clicks: &[ClickRecord]) {
        for a in clicks.iter().filter(|c| c.detector == 1) {
            for b in clicks.iter().filter(|c| c.detector == 2) {
                self.record(a.timestamp_ps - b.timestamp_ps);
            }
        }
    }

    pub fn binned_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if self.bin_width_ps != other.bin_width_ps || self.range_ps != other.range_ps {
            return Err(Error::Incompatible(format!(
                "bin {} ps / range {} ps vs bin {} ps / range {} ps",
                self.bin_width_ps, self.range_ps, other.bin_width_ps, other.range_ps
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.total_pairs += other.total_pairs;
        Ok(())
    }

    fn window_bins(&self, center_ps: f64, half_width_ps: f64) -> impl Iterator<Item = usize> + '_ {
        let eps = 1e-9 * self.bin_width_ps;
        (0..self.counts.len())
            .filter(move |&i| (self.bin_center(i) - center_ps).abs() <= half_width_ps + eps)
    }

    /// Counts in bins whose centers lie within `half_width_ps` of `center_ps`.
    pub fn window_count(&self, center_ps: f64, half_width_ps: f64) -> u64 {
        self.window_bins(center_ps, half_width_ps)
            .map(|i| self.counts[i])
            .sum()
    }

    /// Delay span actually covered by [`window_count`](Self::window_count): a whole number
    /// of bins, so wider than `2·half_width_ps` when the window edge cuts a bin.
    pub fn window_width(&self, center_ps: f64, half_width_ps: f64) -> f64 {
        self.window_bins(center_ps, half_width_ps).count() as f64 * self.bin_width_ps
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.counts.len() * 12 + 256);
        s.push_str(&format!("# label={}\n", self.meta.label));
        s.push_str(&format!("# seed={}\n", self.meta.seed));
        s.push_str(&format!("# config_hash={}\n", self.meta.config_hash));
        s.push_str(&format!(
            "# pulse_period_ps={}\n",
            self.meta.pulse_period_ps
        ));
        s.push_str(&format!("# total_pairs={}\n", self.total_pairs));
        s.push_str(&format!("# overflow={}\n", self.overflow));
        s.push_str("bin_center_ps,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.bin_center(i), c));
        }
        s
    }
}

/// Builds a histogram from a click stream.
pub fn accumulate_histogram(
    clicks: &[ClickRecord],
    bin_width_ps: f64,
    range_ps: f64,
    meta: HistogramMeta,
) -> Result<CoincidenceHistogram> {
    if meta.pulse_period_ps > 0.0 && range_ps < meta.pulse_period_ps {
        log::warn!(
            "histogram range {range_ps} ps is shorter than the pulse period {} ps; side peaks are lost",
            meta.pulse_period_ps
        );
    }
    let mut h = CoincidenceHistogram::new(bin_width_ps, range_ps, meta)?;
    h.record_clicks(clicks);
    Ok(h)
}

/// Central-peak area over the mean side-peak area of a pulsed HBT histogram.
pub fn extract_g2_zero(hist: &CoincidenceHistogram) -> Result<Estimate> {
    let period = hist.meta.pulse_period_ps;
    if period <= 0.0 {
        return Err(Error::Undefined("histogram has no pulse period".into()));
    }
    let half = 0.5 * period;
    let peaks = ((hist.range_ps - half) / period).floor() as i64;
    if peaks < 3 {
        return Err(Error::Undefined(format!(
            "only {peaks} side peaks per side fit in ±{} ps; need 3",
            hist.range_ps
        )));
    }
    let central = hist.window_count(0.0, half - 1e-6) as f64;
    let side: f64 = (1..=peaks)
        .flat_map(|k| [k, -k])
        .map(|k| hist.window_count(k as f64 * period, half - 1e-6) as f64)
        .sum();
    if side == 0.0 {
        return Err(Error::Undefined("no side-peak coincidences".into()));
    }
    let mean_side = side / (2 * peaks) as f64;
    let value = central / mean_side;
    let stderr = if central > 0.0 {
        value * (1.0 / central + 1.0 / side).sqrt()
    } else {
        1.0 / mean_side
    };
    Ok(Estimate { value, stderr })
}

/// V = 1 − N_res/N_ref within |τ| ≤ window/2 of the central peak.
pub fn extract_visibility(
    hist_resonant: &CoincidenceHistogram,
    hist_reference: &CoincidenceHistogram,
    window_ps: f64,
) -> Result<VisibilityEstimate> {
    ensure(
        window_ps > 0.0 && 0.5 * window_ps <= hist_resonant.range_ps,
        "window_ps",
        window_ps,
        &format!(
            "0 < window_ps <= 2*range = {}",
            2.0 * hist_resonant.range_ps
        ),
    )?;
    if hist_resonant.bin_width_ps != hist_reference.bin_width_ps
        || hist_resonant.range_ps != hist_reference.range_ps
    {
        return Err(Error::Incompatible(
            "resonant and reference histograms have different binning".into(),
        ));
    }
    let n_res = hist_resonant.window_count(0.0, 0.5 * window_ps);
    let n_ref = hist_reference.window_count(0.0, 0.5 * window_ps);
    if n_ref == 0 {
        return Err(Error::Undefined(format!(
            "no reference coincidences within a {window_ps} ps window"
        )));
    }
    let r = n_res as f64 / n_ref as f64;
    let stderr = if n_res > 0 {
        r * (1.0 / n_res as f64 + 1.0 / n_ref as f64).sqrt()
    } else {
        1.0 / n_ref as f64
    };
    Ok(VisibilityEstimate {
        window_ps: hist_resonant.window_width(0.0, 0.5 * window_ps),
        visibility: 1.0 - r,
        stderr,
        n_res,
        n_ref,
    })
}
