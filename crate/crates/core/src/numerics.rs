//! Standard-normal kernel and the IRB capital-requirement function.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the IRB capital formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrbParams {
    pub asset_correlation: f64,
    pub confidence_level: f64,
}

impl IrbParams {
    pub fn new(asset_correlation: f64, confidence_level: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&asset_correlation) {
            return Err(Error::Domain {
                what: "asset_correlation",
                value: asset_correlation,
                reason: "must lie in [0, 1)",
            });
        }
        if !(confidence_level > 0.0 && confidence_level < 1.0) {
            return Err(Error::Domain {
                what: "confidence_level",
                value: confidence_level,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(Self {
            asset_correlation,
            confidence_level,
        })
    }
}

impl Default for IrbParams {
    fn default() -> Self {
        Self {
            asset_correlation: 0.15,
            confidence_level: 0.999,
        }
    }
}

/// Φ(z), computed through `erfc` so both tails keep relative accuracy.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Φ⁻¹(p): Wichura's AS 241 (PPND16) followed by one Newton step on Φ.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            reason: "quantile requires 0 < p < 1",
        });
    }
    let z = ppnd16(p);
    let density = std_normal_pdf(z);
    if density <= f64::MIN_POSITIVE {
        return Ok(z);
    }
    // Residual taken on the smaller tail to avoid cancellation near 1.
    let step = if p < 0.5 {
        (std_normal_cdf(z) - p) / density
    } else {
        ((1.0 - p) - std_normal_cdf(-z)) / density
    };
    Ok(z - step)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[allow(clippy::excessive_precision)]
fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let magnitude = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Basel IRB capital requirement `LGD · (Z − PD)` with
/// `Z = Φ((Φ⁻¹(PD) + √ρ Φ⁻¹(q)) / √(1 − ρ))`.
///
/// `pd = 0` or `lgd = 0` yields exactly 0 (the PD → 0 limit of `Z` is 0).
/// The result is clamped to `[0, 1]`.
pub fn irb_capital(pd: f64, lgd: f64, params: &IrbParams) -> Result<f64> {
    if !(0.0..1.0).contains(&pd) {
        return Err(Error::Domain {
            what: "pd",
            value: pd,
            reason: "capital formula requires 0 <= pd < 1",
        });
    }
    if !(0.0..=1.0).contains(&lgd) {
        return Err(Error::Domain {
            what: "lgd",
            value: lgd,
            reason: "must lie in [0, 1]",
        });
    }
    if pd == 0.0 || lgd == 0.0 {
        return Ok(0.0);
    }
    let rho = params.asset_correlation;
    let stressed = (std_normal_quantile(pd)?
        + rho.sqrt() * std_normal_quantile(params.confidence_level)?)
        / (1.0 - rho).sqrt();
    let z = std_normal_cdf(stressed);
    Ok((lgd * (z - pd)).clamp(0.0, 1.0))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}
