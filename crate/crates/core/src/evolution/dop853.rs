//! Dormand-Prince 8(5,3) embedded Runge-Kutta stepper on complex vectors.
//!
//! Tableau and error norm follow Hairer, Nørsett & Wanner's DOP853. No dense
//! output: the driver clips steps so that every sample time is hit exactly.

use crate::error::{Error, Result};
use crate::quantum::{C64, ZERO};

/// `dy/dt = f(t, y)` on `C^dim`.
pub(crate) trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

const C2: f64 = 0.526_001_519_587_677_318_785_587_544_488e-1;
const C3: f64 = 0.789_002_279_381_515_978_178_381_316_732e-1;
const C4: f64 = 0.118_350_341_907_227_396_726_757_197_510;
const C5: f64 = 0.281_649_658_092_772_603_273_242_802_490;
const C6: f64 = 0.333_333_333_333_333_333_333_333_333_333;
const C7: f64 = 0.25;
const C8: f64 = 0.307_692_307_692_307_692_307_692_307_692;
const C9: f64 = 0.651_282_051_282_051_282_051_282_051_282;
const C10: f64 = 0.6;
const C11: f64 = 0.857_142_857_142_857_142_857_142_857_142;

const B1: f64 = 5.429_373_411_656_876_223_805_357_663_63e-2;
const B6: f64 = 4.450_312_892_752_408_881_441_139_505_66;
const B7: f64 = 1.891_517_899_314_500_383_042_815_990_44;
const B8: f64 = -5.801_203_960_010_584_781_467_211_422_7;
const B9: f64 = 3.111_643_669_578_198_944_089_160_623_7e-1;
const B10: f64 = -1.521_609_496_625_160_785_561_788_068_05e-1;
const B11: f64 = 2.013_654_008_040_303_483_747_765_375_01e-1;
const B12: f64 = 4.471_061_572_777_259_051_768_855_690_43e-2;

const BHH1: f64 = 0.244_094_488_188_976_377_952_755_905_512;
const BHH2: f64 = 0.733_846_688_281_611_857_341_361_741_547;
const BHH3: f64 = 0.220_588_235_294_117_647_058_823_529_412e-1;

const ER1: f64 = 0.131_200_449_941_948_807_325_010_299_6e-1;
const ER6: f64 = -0.122_515_644_637_620_444_072_056_975_3e1;
const ER7: f64 = -0.495_758_949_657_250_191_521_407_995_2;
const ER8: f64 = 0.166_437_718_245_498_653_696_153_041_5e1;
const ER9: f64 = -0.350_328_848_749_973_681_688_648_729_0;
const ER10: f64 = 0.334_179_118_713_017_479_029_731_884_1;
const ER11: f64 = 0.819_232_064_851_157_124_657_074_261_3e-1;
const ER12: f64 = -0.223_553_078_638_862_952_588_442_784_5e-1;

const A21: f64 = 5.260_015_195_876_773_187_855_875_444_88e-2;
const A31: f64 = 1.972_505_698_453_789_945_445_953_291_83e-2;
const A32: f64 = 5.917_517_095_361_369_836_337_859_875_49e-2;
const A41: f64 = 2.958_758_547_680_684_918_168_929_937_75e-2;
const A43: f64 = 8.876_275_643_042_054_754_506_789_813_24e-2;
const A51: f64 = 2.413_651_341_592_666_855_023_697_986_65e-1;
const A53: f64 = -8.845_494_793_282_860_853_448_649_627_17e-1;
const A54: f64 = 9.248_340_032_617_920_031_157_379_665_43e-1;
const A61: f64 = 3.703_703_703_703_703_703_703_703_703_7e-2;
const A64: f64 = 1.708_286_087_294_738_712_796_044_821_73e-1;
const A65: f64 = 1.254_676_875_668_224_250_166_918_141_23e-1;
const A71: f64 = 3.710_937_5e-2;
const A74: f64 = 1.702_522_110_195_440_393_149_780_602_72e-1;
const A75: f64 = 6.021_653_898_045_596_068_502_193_972_83e-2;
const A76: f64 = -1.757_812_5e-2;
const A81: f64 = 3.709_200_011_850_479_271_087_793_198_36e-2;
const A84: f64 = 1.703_839_257_122_399_938_102_140_547_05e-1;
const A85: f64 = 1.072_620_304_463_732_846_518_091_991_68e-1;
const A86: f64 = -1.531_943_774_862_440_175_279_361_582_36e-2;
const A87: f64 = 8.273_789_163_814_022_887_584_737_660_02e-3;
const A91: f64 = 6.241_109_587_160_757_171_144_295_778_12e-1;
const A94: f64 = -3.360_892_629_446_941_294_068_571_098_25;
const A95: f64 = -8.682_193_468_417_260_068_181_898_914_53e-1;
const A96: f64 = 2.759_209_969_944_670_830_494_156_007_97e1;
const A97: f64 = 2.015_406_755_047_789_340_861_867_889_79e1;
const A98: f64 = -4.348_988_418_106_995_884_773_662_551_44e1;
const A101: f64 = 4.776_625_364_382_643_658_904_339_085_27e-1;
const A104: f64 = -2.488_114_619_971_667_641_926_425_864_68;
const A105: f64 = -5.902_908_268_368_429_963_714_464_757_43e-1;
const A106: f64 = 2.123_005_144_818_119_423_472_889_498_97e1;
const A107: f64 = 1.527_923_363_288_242_358_325_969_229_38e1;
const A108: f64 = -3.328_821_096_898_486_291_944_532_655_87e1;
const A109: f64 = -2.033_120_170_850_862_613_582_229_285_93e-2;
const A111: f64 = -9.371_424_300_859_873_257_170_402_165_8e-1;
const A114: f64 = 5.186_372_428_844_063_708_300_238_532_09;
const A115: f64 = 1.091_437_348_996_729_578_185_002_546_54;
const A116: f64 = -8.149_787_010_746_926_125_139_972_673_57;
const A117: f64 = -1.852_006_565_999_695_986_415_661_807_01e1;
const A118: f64 = 2.273_948_709_935_050_428_189_700_567_34e1;
const A119: f64 = 2.493_605_552_679_652_389_870_893_967_62;
const A1110: f64 = -3.046_764_471_898_219_500_382_366_902_2;
const A121: f64 = 2.273_310_147_516_538_207_923_597_684_49;
const A124: f64 = -1.053_449_546_673_725_019_840_666_898_79e1;
const A125: f64 = -2.000_872_058_224_862_499_096_757_184_44;
const A126: f64 = -1.795_893_186_311_879_891_727_659_505_34e1;
const A127: f64 = 2.794_888_452_941_996_005_084_998_088_37e1;
const A128: f64 = -2.858_998_277_135_023_694_740_655_086_74;
const A129: f64 = -8.872_856_933_530_629_544_335_492_892_58;
const A1210: f64 = 1.236_056_717_579_430_306_472_662_015_28e1;
const A1211: f64 = 6.433_927_460_157_635_303_559_704_840_46e-1;

/// Step-size controller with β = 0 (no PI memory).
struct Controller {
    reject: bool,
}

impl Controller {
    const ALPHA: f64 = 1.0 / 8.0;
    const SAFE: f64 = 0.9;
    const MIN_SCALE: f64 = 0.333;
    const MAX_SCALE: f64 = 6.0;

    /// `Ok(h_next)` on acceptance, `Err(h_retry)` on rejection.
    fn judge(&mut self, err: f64, h: f64) -> std::result::Result<f64, f64> {
        if err <= 1.0 {
            let scale = if err == 0.0 {
                Self::MAX_SCALE
            } else {
                (Self::SAFE * err.powf(-Self::ALPHA)).clamp(Self::MIN_SCALE, Self::MAX_SCALE)
            };
            let h_next = if self.reject {
                h * scale.min(1.0)
            } else {
                h * scale
            };
            self.reject = false;
            Ok(h_next)
        } else {
            self.reject = true;
            Err(h * Self::MIN_SCALE.max(Self::SAFE * err.powf(-Self::ALPHA)))
        }
    }
}

pub(crate) struct StepperSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

pub(crate) struct Dop853 {
    settings: StepperSettings,
    controller: Controller,
    k: [Vec<C64>; 12],
    ytmp: Vec<C64>,
    yout: Vec<C64>,
    h_next: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Dop853 {
    pub fn new(dim: usize, settings: StepperSettings) -> Self {
        Self {
            settings,
            controller: Controller { reject: false },
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            ytmp: vec![ZERO; dim],
            yout: vec![ZERO; dim],
            h_next: 0.0,
            steps: 0,
            rejected: 0,
        }
    }

    /// Integrate `y` from `*t` to exactly `t_target`.
    pub fn advance<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: &mut f64,
        y: &mut [C64],
        t_target: f64,
    ) -> Result<()> {
        sys.rhs(*t, y, &mut self.k[0]);
        if self.h_next == 0.0 {
            self.h_next = self.initial_step(y, t_target - *t);
        }
        while *t < t_target {
            let remaining = t_target - *t;
            let mut h = self.h_next.min(self.settings.max_step);
            let mut clipped = false;
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
                clipped = true;
            }
            loop {
                let err = self.attempt(sys, *t, y, h);
                match self.controller.judge(err, h) {
                    Ok(h_next) => {
                        self.h_next = if clipped {
                            self.h_next.max(h_next)
                        } else {
                            h_next
                        };
                        break;
                    }
                    Err(h_retry) => {
                        self.rejected += 1;
                        clipped = false;
                        h = h_retry;
                        if !(h > f64::EPSILON * t.abs().max(1e-12)) {
                            return Err(Error::StepSizeUnderflow { t: *t, h });
                        }
                    }
                }
            }
            self.steps += 1;
            if self.steps > self.settings.max_steps {
                return Err(Error::TooManySteps {
                    t: *t,
                    steps: self.settings.max_steps,
                });
            }
            y.copy_from_slice(&self.yout);
            *t = if clipped { t_target } else { *t + h };
            sys.rhs(*t, y, &mut self.k[0]);
        }
        Ok(())
    }

    fn initial_step(&self, y: &[C64], span: f64) -> f64 {
        let ynorm = y.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let dnorm = self.k[0].iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let h = if dnorm > 0.0 {
            0.01 * ynorm.max(1e-8) / dnorm
        } else {
            span
        };
        h.min(span).min(self.settings.max_step)
    }

    fn stage<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[C64],
        h: f64,
        target: usize,
        coeffs: &[(usize, f64)],
    ) {
        for i in 0..y.len() {
            let mut acc = ZERO;
            for &(j, a) in coeffs {
                acc += self.k[j][i] * a;
            }
            self.ytmp[i] = y[i] + acc * h;
        }
        let (before, after) = self.k.split_at_mut(target);
        let _ = before;
        sys.rhs(t, &self.ytmp, &mut after[0]);
    }

    /// One trial step; writes `yout` and returns the scaled error norm.
    fn attempt<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[C64], h: f64) -> f64 {
        self.stage(sys, t + C2 * h, y, h, 1, &[(0, A21)]);
        self.stage(sys, t + C3 * h, y, h, 2, &[(0, A31), (1, A32)]);
        self.stage(sys, t + C4 * h, y, h, 3, &[(0, A41), (2, A43)]);
        self.stage(sys, t + C5 * h, y, h, 4, &[(0, A51), (2, A53), (3, A54)]);
        self.stage(sys, t + C6 * h, y, h, 5, &[(0, A61), (3, A64), (4, A65)]);
        self.stage(
            sys,
            t + C7 * h,
            y,
            h,
            6,
            &[(0, A71), (3, A74), (4, A75), (5, A76)],
        );
        self.stage(
            sys,
            t + C8 * h,
            y,
            h,
            7,
            &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)],
        );
        self.stage(
            sys,
            t + C9 * h,
            y,
            h,
            8,
            &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)],
        );
        self.stage(
            sys,
            t + C10 * h,
            y,
            h,
            9,
            &[
                (0, A101),
                (3, A104),
                (4, A105),
                (5, A106),
                (6, A107),
                (7, A108),
                (8, A109),
            ],
        );
        self.stage(
            sys,
            t + C11 * h,
            y,
            h,
            10,
            &[
                (0, A111),
                (3, A114),
                (4, A115),
                (5, A116),
                (6, A117),
                (7, A118),
                (8, A119),
                (9, A1110),
            ],
        );
        self.stage(
            sys,
            t + h,
            y,
            h,
            11,
            &[
                (0, A121),
                (3, A124),
                (4, A125),
                (5, A126),
                (6, A127),
                (7, A128),
                (8, A129),
                (9, A1210),
                (10, A1211),
            ],
        );
        let s = &self.settings;
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..y.len() {
            let k = &self.k;
            let slope = k[0][i] * B1
                + k[5][i] * B6
                + k[6][i] * B7
                + k[7][i] * B8
                + k[8][i] * B9
                + k[9][i] * B10
                + k[10][i] * B11
                + k[11][i] * B12;
            self.yout[i] = y[i] + slope * h;
            let e5 = slope - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
            let e3 = k[0][i] * ER1
                + k[5][i] * ER6
                + k[6][i] * ER7
                + k[7][i] * ER8
                + k[8][i] * ER9
                + k[9][i] * ER10
                + k[10][i] * ER11
                + k[11][i] * ER12;
            let sk = s.abs_tol + s.rel_tol * y[i].norm().max(self.yout[i].norm());
            err += (e5.norm() / sk).powi(2);
            err2 += (e3.norm() / sk).powi(2);
        }
        let deno = err + 0.01 * err2;
        let deno = if deno > 0.0 { deno } else { 1.0 };
        let norm = h.abs() * err * (1.0 / (y.len() as f64 * deno)).sqrt();
        if norm.is_finite() {
            norm
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::I;

    struct Rotation(f64);
    impl OdeSystem for Rotation {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = -I * self.0 * y[0];
        }
    }

    /// y' = −i t y has y(t) = exp(−i t²/2).
    struct Chirp;
    impl OdeSystem for Chirp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = -I * t * y[0];
        }
    }

    fn settings(tol: f64) -> StepperSettings {
        StepperSettings {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn constant_rotation() {
        let mut s = Dop853::new(1, settings(1e-10));
        let mut y = [C64::new(1.0, 0.0)];
        let mut t = 0.0;
        for k in 1..=10 {
            s.advance(&Rotation(3.0), &mut t, &mut y, k as f64).unwrap();
            assert_eq!(t, k as f64);
            assert!((y[0] - C64::from_polar(1.0, -3.0 * t)).norm() < 1e-8);
        }
    }

    #[test]
    fn time_dependent_rate() {
        let mut s = Dop853::new(1, settings(1e-11));
        let mut y = [C64::new(1.0, 0.0)];
        let mut t = 0.0;
        s.advance(&Chirp, &mut t, &mut y, 6.0).unwrap();
        assert!((y[0] - C64::from_polar(1.0, -18.0)).norm() < 1e-8);
        assert!(Chirp.dim() == 1);
    }

    #[test]
    fn tightening_tolerance_reduces_error() {
        let err = |tol: f64| {
            let mut s = Dop853::new(1, settings(tol));
            let mut y = [C64::new(1.0, 0.0)];
            let mut t = 0.0;
            s.advance(&Chirp, &mut t, &mut y, 20.0).unwrap();
            (y[0] - C64::from_polar(1.0, -200.0)).norm()
        };
        let (loose, tight) = (err(1e-3), err(1e-11));
        assert!(loose > 1e-8, "{loose:e}");
        assert!(tight < 1e-2 * loose, "{tight:e} vs {loose:e}");
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut st = settings(1e-12);
        st.max_steps = 3;
        let mut s = Dop853::new(1, st);
        let mut y = [C64::new(1.0, 0.0)];
        let mut t = 0.0;
        let r = s.advance(&Rotation(100.0), &mut t, &mut y, 10.0);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
        assert!(Rotation(1.0).dim() == 1);
    }
}
