use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest cuboid edge the sampler will emit, in meters.
pub const MIN_DIMENSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    Building,
    Tree,
    Vehicle,
    Pedestrian,
    Ground,
    Road,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 6] = [
        ObjectClass::Building,
        ObjectClass::Tree,
        ObjectClass::Vehicle,
        ObjectClass::Pedestrian,
        ObjectClass::Ground,
        ObjectClass::Road,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Building => "Building",
            ObjectClass::Tree => "Tree",
            ObjectClass::Vehicle => "Vehicle",
            ObjectClass::Pedestrian => "Pedestrian",
            ObjectClass::Ground => "Ground",
            ObjectClass::Road => "Road",
        }
    }

    /// The ground plane supports every other object and is exempt from the
    /// occupancy map.
    pub fn is_support(self) -> bool {
        matches!(self, ObjectClass::Ground)
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, ObjectClass::Vehicle | ObjectClass::Pedestrian)
    }
}

/// Gaussian prior on one cuboid dimension, truncated to mean ± 3σ and
/// clamped to [`MIN_DIMENSION`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    pub fn fixed(value: f64) -> Self {
        Self { mean: value, std: 0.0 }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.mean.is_finite() && self.mean > 0.0) {
            return Err(Error::InvalidPrior(format!("{what}: mean must be positive, got {}", self.mean)));
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return Err(Error::InvalidPrior(format!("{what}: stddev must be >= 0, got {}", self.std)));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            return self.mean.max(MIN_DIMENSION);
        }
        let normal = Normal::new(self.mean, self.std).expect("validated stddev");
        loop {
            let v: f64 = normal.sample(rng);
            if (v - self.mean).abs() <= 3.0 * self.std {
                return v.max(MIN_DIMENSION);
            }
        }
    }
}

fn default_styles() -> u32 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPrior {
    pub class: ObjectClass,
    pub probability: f64,
    pub length: Gaussian,
    pub breadth: Gaussian,
    pub height: Gaussian,
    /// Number of parametric shape styles to choose from uniformly.
    #[serde(default = "default_styles")]
    pub shape_styles: u32,
}

/// Multinomial class prior plus per-class dimension priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassPriors {
    pub classes: Vec<ClassPrior>,
}

impl ClassPriors {
    pub fn new(classes: Vec<ClassPrior>) -> Self {
        Self { classes }
    }

    /// Uniform multinomial over `classes` with the built-in dimension priors.
    pub fn uniform(classes: &[ObjectClass]) -> Self {
        let p = 1.0 / classes.len() as f64;
        Self {
            classes: classes
                .iter()
                .map(|&c| {
                    let mut prior = Self::default_prior(c);
                    prior.probability = p;
                    prior
                })
                .collect(),
        }
    }

    /// Built-in dimension priors (meters) for a class.
    pub fn default_prior(class: ObjectClass) -> ClassPrior {
        let (l, b, h) = match class {
            ObjectClass::Building => (Gaussian::new(10.0, 2.0), Gaussian::new(10.0, 2.0), Gaussian::new(18.0, 5.0)),
            ObjectClass::Tree => (Gaussian::new(3.0, 0.5), Gaussian::new(3.0, 0.5), Gaussian::new(6.0, 1.0)),
            ObjectClass::Vehicle => (Gaussian::new(4.5, 0.4), Gaussian::new(1.9, 0.15), Gaussian::new(1.6, 0.2)),
            ObjectClass::Pedestrian => (Gaussian::new(0.5, 0.05), Gaussian::new(0.4, 0.05), Gaussian::new(1.75, 0.1)),
            ObjectClass::Ground => (Gaussian::fixed(1.0), Gaussian::fixed(1.0), Gaussian::fixed(0.05)),
            ObjectClass::Road => (Gaussian::new(40.0, 5.0), Gaussian::new(8.0, 1.0), Gaussian::fixed(0.01)),
        };
        ClassPrior {
            class,
            probability: 0.0,
            length: l,
            breadth: b,
            height: h,
            shape_styles: default_styles(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidPrior("no classes".into()));
        }
        let mut seen = Vec::new();
        let mut total = 0.0;
        for prior in &self.classes {
            if seen.contains(&prior.class) {
                return Err(Error::InvalidPrior(format!("class {} listed twice", prior.class.name())));
            }
            seen.push(prior.class);
            if !(prior.probability.is_finite() && prior.probability >= 0.0) {
                return Err(Error::InvalidPrior(format!(
                    "{}: probability {} is not a valid mass",
                    prior.class.name(),
                    prior.probability
                )));
            }
            if prior.shape_styles == 0 {
                return Err(Error::InvalidPrior(format!("{}: shape_styles must be >= 1", prior.class.name())));
            }
            prior.length.validate(&format!("{} length", prior.class.name()))?;
            prior.breadth.validate(&format!("{} breadth", prior.class.name()))?;
            prior.height.validate(&format!("{} height", prior.class.name()))?;
            total += prior.probability;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPrior(format!("class probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn get(&self, class: ObjectClass) -> Option<&ClassPrior> {
        self.classes.iter().find(|p| p.class == class)
    }

    /// Inverse-CDF draw from the class multinomial.
    pub fn sample_class<R: Rng + ?Sized>(&self, rng: &mut R) -> &ClassPrior {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for prior in &self.classes {
            acc += prior.probability;
            if u < acc {
                return prior;
            }
        }
        // u landed in the rounding slack above the last cumulative sum
        self.classes
            .iter()
            .rev()
            .find(|p| p.probability > 0.0)
            .unwrap_or(&self.classes[self.classes.len() - 1])
    }
}
