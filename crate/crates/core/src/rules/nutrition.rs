use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RulesError;
use crate::scalar::Scalar;

/// Shown with every recommendation; medical complications are not assessed.
pub const COMPLICATIONS_ADVISORY: &str =
    "Suggestion only: medical complications require clinical assessment and override this recommendation.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Oedema {
    #[default]
    #[serde(rename = "none")]
    None,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "++")]
    PlusPlus,
    #[serde(rename = "+++")]
    PlusPlusPlus,
}

impl Oedema {
    pub fn as_str(&self) -> &'static str {
        match self {
            Oedema::None => "none",
            Oedema::Plus => "+",
            Oedema::PlusPlus => "++",
            Oedema::PlusPlusPlus => "+++",
        }
    }

    /// Numeric grade 0..=3, as stored in visit measures.
    pub fn grade(&self) -> u8 {
        *self as u8
    }

    pub fn from_grade(grade: u8) -> Option<Self> {
        [Oedema::None, Oedema::Plus, Oedema::PlusPlus, Oedema::PlusPlusPlus]
            .get(grade as usize)
            .copied()
    }
}

impl fmt::Display for Oedema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Oedema {
    type Err = RulesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" | "0" | "" => Ok(Oedema::None),
            "+" | "1" => Ok(Oedema::Plus),
            "++" | "2" => Ok(Oedema::PlusPlus),
            "+++" | "3" => Ok(Oedema::PlusPlusPlus),
            other => Err(RulesError::InvalidInput(format!(
                "oedema `{other}` (expected none, +, ++ or +++)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Program {
    #[serde(rename = "NONE")]
    None,
    /// Supplementary Feeding Program.
    #[serde(rename = "SFP")]
    Sfp,
    /// Outpatient Therapeutic Program.
    #[serde(rename = "OTP")]
    Otp,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Program::None => "NONE",
            Program::Sfp => "SFP",
            Program::Otp => "OTP",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NutritionInputs<T> {
    z_wfh: T,
    muac_cm: T,
    oedema: Oedema,
    recently_discharged_otp: bool,
}

impl<T: Scalar> NutritionInputs<T> {
    pub fn new(z_wfh: T, muac_cm: T, oedema: Oedema, recently_discharged_otp: bool) -> Result<Self, RulesError> {
        if !z_wfh.is_finite() {
            return Err(RulesError::InvalidInput(format!(
                "weight-for-height z {z_wfh} is not finite"
            )));
        }
        if muac_cm <= T::zero() || !muac_cm.is_finite() {
            return Err(RulesError::InvalidInput(format!("MUAC {muac_cm} cm must be positive")));
        }
        Ok(NutritionInputs {
            z_wfh,
            muac_cm,
            oedema,
            recently_discharged_otp,
        })
    }

    pub fn z_wfh(&self) -> T {
        self.z_wfh
    }

    pub fn muac_cm(&self) -> T {
        self.muac_cm
    }

    pub fn oedema(&self) -> Oedema {
        self.oedema
    }

    pub fn recently_discharged_otp(&self) -> bool {
        self.recently_discharged_otp
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramRecommendation {
    pub program: Program,
    /// Every satisfied criterion of the recommended program.
    pub reasons: Vec<String>,
    pub advisory: String,
}

/// OTP when MUAC < 11.5 cm, z < -3 or any oedema; otherwise SFP when
/// -3 <= z < -2, 11.5 <= MUAC < 12.5 cm or just discharged from OTP.
pub fn recommend_program<T: Scalar>(inputs: &NutritionInputs<T>) -> ProgramRecommendation {
    let z = inputs.z_wfh;
    let muac = inputs.muac_cm;
    let (m115, m125) = (T::of(11.5), T::of(12.5));
    let (z3, z2) = (T::of(-3.0), T::of(-2.0));

    let mut otp = Vec::new();
    if muac < m115 {
        otp.push("MUAC < 11.5".to_string());
    }
    if z < z3 {
        otp.push("z < -3".to_string());
    }
    if inputs.oedema != Oedema::None {
        otp.push(format!("oedema {}", inputs.oedema));
    }
    let (program, reasons) = if !otp.is_empty() {
        (Program::Otp, otp)
    } else {
        let mut sfp = Vec::new();
        if z >= z3 && z < z2 {
            sfp.push("-3 <= z < -2".to_string());
        }
        if muac >= m115 && muac < m125 {
            sfp.push("11.5 <= MUAC < 12.5".to_string());
        }
        if inputs.recently_discharged_otp {
            sfp.push("recently discharged from OTP".to_string());
        }
        if sfp.is_empty() {
            (Program::None, sfp)
        } else {
            (Program::Sfp, sfp)
        }
    };
    ProgramRecommendation {
        program,
        reasons,
        advisory: COMPLICATIONS_ADVISORY.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(z: f64, muac: f64, oedema: Oedema, discharged: bool) -> ProgramRecommendation {
        recommend_program(&NutritionInputs::new(z, muac, oedema, discharged).unwrap())
    }

    #[test]
    fn otp_by_muac() {
        let r = rec(-1.0, 11.0, Oedema::None, false);
        assert_eq!(r.program, Program::Otp);
        assert_eq!(r.reasons, vec!["MUAC < 11.5"]);
    }

    #[test]
    fn sfp_by_z_and_muac() {
        let r = rec(-2.5, 12.0, Oedema::None, false);
        assert_eq!(r.program, Program::Sfp);
        assert_eq!(r.reasons.len(), 2);
    }

    #[test]
    fn none_when_nothing_holds() {
        let r = rec(-1.0, 13.0, Oedema::None, false);
        assert_eq!(r.program, Program::None);
        assert!(r.reasons.is_empty());
    }

    #[test]
    fn boundaries_are_lower_inclusive() {
        assert_eq!(rec(-3.0, 13.0, Oedema::None, false).program, Program::Sfp);
        assert_eq!(rec(-2.0, 13.0, Oedema::None, false).program, Program::None);
        assert_eq!(rec(-1.0, 11.5, Oedema::None, false).program, Program::Sfp);
        assert_eq!(rec(-1.0, 12.5, Oedema::None, false).program, Program::None);
        assert_eq!(rec(-3.0001, 13.0, Oedema::None, false).program, Program::Otp);
    }

    #[test]
    fn any_oedema_and_discharge() {
        for o in [Oedema::Plus, Oedema::PlusPlus, Oedema::PlusPlusPlus] {
            let r = rec(0.0, 14.0, o, false);
            assert_eq!(r.program, Program::Otp);
            assert_eq!(r.reasons, vec![format!("oedema {o}")]);
        }
        assert_eq!(rec(0.0, 14.0, Oedema::None, true).program, Program::Sfp);
    }

    #[test]
    fn multiple_otp_reasons() {
        let r = rec(-3.5, 11.0, Oedema::PlusPlus, false);
        assert_eq!(r.reasons, vec!["MUAC < 11.5", "z < -3", "oedema ++"]);
    }

    #[test]
    fn invalid_inputs() {
        assert!(NutritionInputs::new(0.0, 0.0, Oedema::None, false).is_err());
        assert!(NutritionInputs::new(f64::NAN, 12.0, Oedema::None, false).is_err());
        assert!("++++".parse::<Oedema>().is_err());
        assert_eq!("++".parse::<Oedema>().unwrap(), Oedema::PlusPlus);
        assert_eq!(Oedema::from_grade(3), Some(Oedema::PlusPlusPlus));
    }

    #[test]
    fn program_json() {
        assert_eq!(serde_json::to_string(&Program::Otp).unwrap(), "\"OTP\"");
        assert_eq!(serde_json::to_string(&Oedema::PlusPlus).unwrap(), "\"++\"");
        assert!(Program::None < Program::Sfp && Program::Sfp < Program::Otp);
    }
}
