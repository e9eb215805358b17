use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
    Top,
    Bottom,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Left,
        Direction::Right,
        Direction::Top,
        Direction::Bottom,
    ];

    /// Unit offset, y-up: `Top` increases y.
    pub fn offset(self) -> [f64; 2] {
        match self {
            Direction::Left => [-1.0, 0.0],
            Direction::Right => [1.0, 0.0],
            Direction::Top => [0.0, 1.0],
            Direction::Bottom => [0.0, -1.0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Top => "top",
            Direction::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Concept vocabularies for the dining-scene template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptCatalog {
    pub foods: Vec<String>,
    pub drinks: Vec<String>,
    pub tools: Vec<String>,
    #[serde(default = "all_directions")]
    pub directions: Vec<Direction>,
}

fn all_directions() -> Vec<Direction> {
    Direction::ALL.to_vec()
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl Default for ConceptCatalog {
    /// 6 foods, 4 drinks, 5 tools.
    fn default() -> Self {
        ConceptCatalog {
            foods: owned(&["pasta", "steak", "salad", "sushi", "pizza", "rice"]),
            drinks: owned(&["water", "wine", "juice", "milk"]),
            tools: owned(&["fork", "knife", "spoon", "chopsticks", "napkin"]),
            directions: all_directions(),
        }
    }
}

impl ConceptCatalog {
    pub fn new(foods: Vec<String>, drinks: Vec<String>, tools: Vec<String>) -> Result<Self> {
        let c = ConceptCatalog {
            foods,
            drinks,
            tools,
            directions: all_directions(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, names) in [("foods", &self.foods), ("drinks", &self.drinks), ("tools", &self.tools)] {
            if names.is_empty() {
                return Err(Error::config(format!("catalog category `{what}` is empty")));
            }
            let mut seen = HashSet::new();
            if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
                return Err(Error::config(format!("duplicate `{dup}` in catalog category `{what}`")));
            }
            if names.iter().any(|n| n == PLATE) {
                return Err(Error::config(format!("`{PLATE}` is reserved and cannot appear in `{what}`")));
            }
        }
        let dirs: HashSet<_> = self.directions.iter().collect();
        if self.directions.len() != 4 || dirs.len() != 4 {
            return Err(Error::config("directions must be exactly left, right, top, bottom"));
        }
        if self.tools.len() < 3 {
            return Err(Error::config(format!(
                "need at least 3 tools to fill the template, catalog has {}",
                self.tools.len()
            )));
        }
        Ok(())
    }

    /// Every object concept that can appear in a scene, plate first, in a
    /// fixed order with duplicates across categories removed.
    pub fn object_concepts(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        std::iter::once(PLATE)
            .chain(self.foods.iter().map(String::as_str))
            .chain(self.drinks.iter().map(String::as_str))
            .chain(self.tools.iter().map(String::as_str))
            .filter(|c| seen.insert(*c))
            .collect()
    }
}

/// Name of the centre object present in every scene.
pub const PLATE: &str = "plate";

/// One filled-in scene template.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConceptTuple {
    pub food: String,
    pub drink: String,
    pub tool1: String,
    pub tool2: String,
    pub tool3: String,
    pub dir1: Direction,
    pub dir2: Direction,
}

impl ConceptTuple {
    pub const SLOTS: [&'static str; 7] = ["food", "drink", "tool1", "tool2", "tool3", "dir1", "dir2"];

    /// Slot values in [`ConceptTuple::SLOTS`] order.
    pub fn slots(&self) -> [&str; 7] {
        [
            &self.food,
            &self.drink,
            &self.tool1,
            &self.tool2,
            &self.tool3,
            self.dir1.as_str(),
            self.dir2.as_str(),
        ]
    }

    pub fn slot_strings(&self) -> Vec<String> {
        self.slots().iter().map(|s| s.to_string()).collect()
    }

    /// Checks the tuple against a catalog and the distinctness constraints.
    pub fn validate(&self, catalog: &ConceptCatalog) -> Result<()> {
        let member = |xs: &[String], x: &str| xs.iter().any(|y| y == x);
        if !member(&catalog.foods, &self.food) {
            return Err(Error::config(format!("unknown food `{}`", self.food)));
        }
        if !member(&catalog.drinks, &self.drink) {
            return Err(Error::config(format!("unknown drink `{}`", self.drink)));
        }
        for t in [&self.tool1, &self.tool2, &self.tool3] {
            if !member(&catalog.tools, t) {
                return Err(Error::config(format!("unknown tool `{t}`")));
            }
        }
        if self.tool1 == self.tool2 || self.tool2 == self.tool3 || self.tool1 == self.tool3 {
            return Err(Error::config("tools must be pairwise distinct"));
        }
        if self.dir1 == self.dir2 {
            return Err(Error::config("dir1 and dir2 must differ"));
        }
        Ok(())
    }
}

/// Draws food and drink uniformly, three distinct tools and two distinct
/// directions uniformly without replacement.
pub fn sample_concept_tuple(catalog: &ConceptCatalog, rng: &mut Rng) -> Result<ConceptTuple> {
    catalog.validate()?;
    let food = catalog.foods[rng.random_range(0..catalog.foods.len())].clone();
    let drink = catalog.drinks[rng.random_range(0..catalog.drinks.len())].clone();
    let tools = index::sample(rng, catalog.tools.len(), 3).into_vec();
    let dirs = index::sample(rng, 4, 2).into_vec();
    Ok(ConceptTuple {
        food,
        drink,
        tool1: catalog.tools[tools[0]].clone(),
        tool2: catalog.tools[tools[1]].clone(),
        tool3: catalog.tools[tools[2]].clone(),
        dir1: catalog.directions[dirs[0]],
        dir2: catalog.directions[dirs[1]],
    })
}
