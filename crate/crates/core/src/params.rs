//! Parameter sets for the four case models.
//!
//! Defaults are the published values (treatment scenario 1 for case 1).
//! Case 3 also needs a carrying capacity `K`, which has no published value;
//! it defaults to 1e9.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ModelError, ParamError};

macro_rules! param_set {
    (
        $(#[$meta:meta])*
        $name:ident {
            $( $(#[$fmeta:meta])* $field:ident = $default:expr ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name {
            $( $(#[$fmeta])* pub $field: f64, )+
        }

        impl Default for $name {
            fn default() -> Self {
                $name { $( $field: $default, )+ }
            }
        }

        impl $name {
            /// Field names in declaration order.
            pub const NAMES: &'static [&'static str] = &[ $( stringify!($field) ),+ ];

            /// `(name, value)` pairs in declaration order.
            pub fn fields(&self) -> Vec<(&'static str, f64)> {
                alloc::vec![ $( (stringify!($field), self.$field) ),+ ]
            }

            /// Value of a named field.
            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $( stringify!($field) => Some(self.$field), )+
                    _ => None,
                }
            }

            /// Overwrite a named field.
            pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
                match name {
                    $( stringify!($field) => { self.$field = value; Ok(()) } )+
                    _ => Err(ParamError::UnknownParameter(String::from(name))),
                }
            }

            fn check_non_negative(&self) -> Result<(), ParamError> {
                $(
                    if !(self.$field >= 0.0 && self.$field.is_finite()) {
                        return Err(ParamError::NegativeParameter(stringify!($field)));
                    }
                )+
                Ok(())
            }
        }
    };
}

fn positive(value: f64, name: &'static str) -> Result<(), ParamError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::ZeroDenominator(name))
    }
}

param_set! {
    /// Power-law tumour growth: `dT/dt = a T^alpha - b T^beta`.
    Case0Params {
        /// Proliferation coefficient, /day.
        a = 1.0,
        /// Proliferation exponent.
        alpha = 0.8,
        /// Death coefficient, /day.
        b = 0.5,
        /// Death exponent. 1 gives the linear death term.
        beta = 1.0,
    }
}

impl Case0Params {
    /// Check sign constraints.
    pub fn validate(self) -> Result<Self, ParamError> {
        self.check_non_negative()?;
        if self.alpha <= 0.0 {
            return Err(ParamError::NonPositiveParameter("alpha"));
        }
        if self.beta <= 0.0 {
            return Err(ParamError::NonPositiveParameter("beta"));
        }
        Ok(self)
    }
}

param_set! {
    /// Tumour / generic effector interaction with treatment influx.
    Case1Params {
        /// Tumour growth rate, /day.
        a = 1.636,
        /// Inverse carrying capacity, /cell.
        b = 0.002,
        /// Tumour kill coefficient, /(cell day).
        n = 1.0,
        /// Maximum effector proliferation, /day.
        p = 1.131,
        /// Proliferation half-saturation, cells.
        g = 20.19,
        /// Effector damage coefficient, /(cell day).
        m = 0.00311,
        /// Effector apoptosis rate, /day.
        d = 0.1908,
        /// Treatment influx, cells/day.
        s = 0.318,
    }
}

impl Case1Params {
    /// The four published treatment scenarios (1-based).
    pub fn scenario(id: u8) -> Result<Self, ModelError> {
        let (b, d, s) = match id {
            1 => (0.002, 0.1908, 0.318),
            2 => (0.004, 2.0, 0.318),
            3 => (0.002, 0.3743, 0.1181),
            4 => (0.002, 0.3743, 0.0),
            _ => return Err(ModelError::UnknownScenario(alloc::format!("case1-s{id}"))),
        };
        Ok(Case1Params { b, d, s, ..Case1Params::default() })
    }

    /// Check sign constraints.
    pub fn validate(self) -> Result<Self, ParamError> {
        self.check_non_negative()?;
        positive(self.g, "g")?;
        Ok(self)
    }
}

param_set! {
    /// Tumour / effector / IL-2 model.
    Case2Params {
        /// Tumour growth rate, /day.
        a = 0.18,
        /// Inverse carrying capacity, /cell.
        b = 1e-9,
        /// Antigenicity, /day.
        c = 0.05,
        /// Kill strength, /day.
        aa = 1.0,
        /// Effector proliferation half-saturation in IL-2.
        g1 = 2e7,
        /// Kill half-saturation in tumour cells.
        g2 = 1e5,
        /// IL-2 production half-saturation in tumour cells.
        g3 = 1000.0,
        /// Effector death rate, /day.
        mu2 = 0.03,
        /// IL-2 loss rate, /day.
        mu3 = 10.0,
        /// Maximum effector proliferation, /day.
        p1 = 0.1245,
        /// Maximum IL-2 production per effector, /day.
        p2 = 5.0,
        /// Effector treatment influx, cells/day.
        s1 = 0.0,
        /// IL-2 treatment influx, molecules/day.
        s2 = 0.0,
    }
}

impl Case2Params {
    /// Check sign constraints.
    pub fn validate(self) -> Result<Self, ParamError> {
        self.check_non_negative()?;
        positive(self.g1, "g1")?;
        positive(self.g2, "g2")?;
        positive(self.g3, "g3")?;
        Ok(self)
    }
}

param_set! {
    /// Tumour / effector / IL-2 / TGF-beta model.
    #[allow(non_snake_case)]
    Case3Params {
        /// Tumour growth rate, /day.
        a = 0.18,
        /// Tumour carrying capacity, cells.
        K = 1e9,
        /// Kill strength, /day.
        aa = 1.0,
        /// Antigenicity, /day.
        c = 0.035,
        /// Recruitment inhibition by TGF-beta, /molecule.
        gamma = 10.0,
        /// IL-2 production inhibition by TGF-beta, /molecule.
        alpha = 0.001,
        /// Maximum effector proliferation, /day.
        p1 = 0.1245,
        /// Maximum anti-proliferative effect of TGF-beta, /day.
        q1 = 10.0,
        /// TGF-beta half-saturation of the anti-proliferative effect.
        q2 = 0.1121,
        /// Effector proliferation half-saturation in IL-2.
        g1 = 2e7,
        /// Kill half-saturation in tumour cells.
        g2 = 1e5,
        /// Growth-stimulation half-saturation in TGF-beta.
        g3 = 2e7,
        /// IL-2 production half-saturation in tumour cells.
        g4 = 1000.0,
        /// Maximum TGF-beta growth stimulation, /day.
        p2 = 0.27,
        /// Maximum IL-2 production per effector, /day.
        p3 = 5.0,
        /// Maximum TGF-beta production, molecules/day.
        p4 = 2.84,
        /// Tumour size at which TGF-beta production switches on, cells.
        theta = 1e6,
        /// Effector death rate, /day.
        mu1 = 0.03,
        /// IL-2 loss rate, /day.
        mu2 = 10.0,
        /// TGF-beta decay rate, /day.
        mu3 = 10.0,
    }
}

impl Case3Params {
    /// Check sign constraints.
    pub fn validate(self) -> Result<Self, ParamError> {
        self.check_non_negative()?;
        positive(self.K, "K")?;
        positive(self.g1, "g1")?;
        positive(self.g2, "g2")?;
        positive(self.g3, "g3")?;
        positive(self.g4, "g4")?;
        positive(self.q2, "q2")?;
        positive(self.theta, "theta")?;
        Ok(self)
    }
}

/// Any of the four parameter sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseParams {
    /// Power-law tumour growth.
    Case0(Case0Params),
    /// Tumour / effector.
    Case1(Case1Params),
    /// Tumour / effector / IL-2.
    Case2(Case2Params),
    /// Tumour / effector / IL-2 / TGF-beta.
    Case3(Case3Params),
}

impl CaseParams {
    /// Run the matching `validate`.
    pub fn validate(self) -> Result<Self, ParamError> {
        Ok(match self {
            CaseParams::Case0(p) => CaseParams::Case0(p.validate()?),
            CaseParams::Case1(p) => CaseParams::Case1(p.validate()?),
            CaseParams::Case2(p) => CaseParams::Case2(p.validate()?),
            CaseParams::Case3(p) => CaseParams::Case3(p.validate()?),
        })
    }

    /// Overwrite a named field.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        match self {
            CaseParams::Case0(p) => p.set(name, value),
            CaseParams::Case1(p) => p.set(name, value),
            CaseParams::Case2(p) => p.set(name, value),
            CaseParams::Case3(p) => p.set(name, value),
        }
    }

    /// `(name, value)` pairs.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        match self {
            CaseParams::Case0(p) => p.fields(),
            CaseParams::Case1(p) => p.fields(),
            CaseParams::Case2(p) => p.fields(),
            CaseParams::Case3(p) => p.fields(),
        }
    }

    /// Case number, 0 through 3.
    pub fn case(&self) -> u8 {
        match self {
            CaseParams::Case0(_) => 0,
            CaseParams::Case1(_) => 1,
            CaseParams::Case2(_) => 2,
            CaseParams::Case3(_) => 3,
        }
    }
}
