//! JSON layout files and the built-in presets.
//!
//! ```json
//! {"type": "navigation",
//!  "obstacles": [{"circle": {"cx": 0.3, "cy": 0.5, "r": 0.1}},
//!                {"box": {"x0": 0.5, "y0": 0.0, "x1": 0.6, "y1": 0.3}}],
//!  "goal": {"cx": 0.9, "cy": 0.5, "r": 0.07},
//!  "start": {"x": 0.0, "y": 0.5},
//!  "decision_lines": 10}
//!
//! {"type": "reacher",
//!  "links": 15,
//!  "poles": [{"x0": 0.6, "y0": 0.22, "x1": 1.0, "y1": 0.22}],
//!  "goal": {"cx": 0.78, "cy": 0.42, "r": 0.05},
//!  "max_steps": 60}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::navigation::{NavigationWorld, SUBSTEPS};
use crate::env::quadratic::QuadraticBandit;
use crate::env::reacher::{arm_hits_poles, ReacherArm};
use crate::env::{forward_kinematics, Environment};
use crate::error::{Error, Result};

pub const NAV_CIRCLES: &str = "2d-navigation-circles";
pub const NAV_BOXES: &str = "2d-navigation-boxes";
pub const REACHER_FIFTEEN: &str = "2d-reacher-fifteen-poles";
pub const REACHER_THIRTY: &str = "2d-reacher-thirty-poles";
pub const QUADRATIC: &str = "quadratic-bandit";

/// Every name accepted by [`crate::env::load_environment`].
pub const PRESET_NAMES: [&str; 5] = [NAV_CIRCLES, NAV_BOXES, REACHER_FIFTEEN, REACHER_THIRTY, QUADRATIC];

const DEFAULT_REACHER_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Disc {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).hypot(y - self.cy) <= self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Obstacle {
    Circle(Disc),
    Box(Rect),
}

impl Obstacle {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Obstacle::Circle(c) => c.contains(x, y),
            Obstacle::Box(b) => b.contains(x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationLayout {
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub goal: Disc,
    pub start: Point,
    pub decision_lines: usize,
}

impl NavigationLayout {
    pub fn blocked(&self, x: f64, y: f64) -> bool {
        self.obstacles.iter().any(|o| o.contains(x, y))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLayout(m));
        if self.decision_lines == 0 {
            return bad("decision_lines must be at least 1".into());
        }
        let Point { x, y } = self.start;
        if !(0.0..1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return bad(format!("start ({x}, {y}) is outside the unit square"));
        }
        if self.goal.r.is_nan() || self.goal.r <= 0.0 {
            return bad("goal radius must be positive".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            let ok = match o {
                Obstacle::Circle(c) => c.r > 0.0,
                Obstacle::Box(b) => b.x0 < b.x1 && b.y0 < b.y1,
            };
            if !ok {
                return bad(format!("obstacle {i} is degenerate"));
            }
        }
        if self.blocked(x, y) {
            return bad(format!("an obstacle covers the start position ({x}, {y})"));
        }
        // Every substep column must leave some free vertical position.
        let dx = (1.0 - x) / (self.decision_lines * SUBSTEPS) as f64;
        for s in 1..=self.decision_lines * SUBSTEPS {
            let cx = (x + dx * s as f64).min(1.0);
            let free = (0..=400).any(|j| !self.blocked(cx, j as f64 / 400.0));
            if !free {
                return bad(format!("obstacles close the whole corridor at x = {cx:.3}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReacherLayout {
    pub links: usize,
    #[serde(default)]
    pub poles: Vec<Segment>,
    pub goal: Disc,
    #[serde(default = "default_reacher_steps")]
    pub max_steps: usize,
}

fn default_reacher_steps() -> usize {
    DEFAULT_REACHER_STEPS
}

impl ReacherLayout {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLayout(m));
        if self.links == 0 {
            return bad("links must be at least 1".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.goal.r.is_nan() || self.goal.r <= 0.0 {
            return bad("goal radius must be positive".into());
        }
        if self.goal.cx.hypot(self.goal.cy) > 1.0 + self.goal.r {
            return bad("goal is out of the arm's reach".into());
        }
        let lengths = vec![1.0 / self.links as f64; self.links];
        let joints = forward_kinematics(&vec![0.0; self.links], &lengths);
        if arm_hits_poles(&joints, &self.poles) {
            return bad("a pole intersects the initial arm configuration".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Layout {
    Navigation(NavigationLayout),
    Reacher(ReacherLayout),
}

impl Layout {
    pub fn from_json(text: &str) -> Result<Self> {
        let layout: Layout =
            serde_json::from_str(text).map_err(|e| Error::InvalidLayout(format!("malformed layout: {e}")))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layouts always serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Layout::Navigation(n) => n.validate(),
            Layout::Reacher(r) => r.validate(),
        }
    }

    pub fn build(self, name: &str) -> Result<Box<dyn Environment>> {
        Ok(match self {
            Layout::Navigation(n) => Box::new(NavigationWorld::new(name, n)?),
            Layout::Reacher(r) => Box::new(ReacherArm::new(name, r)?),
        })
    }

    /// Built-in layouts. Returns `None` for unknown names and for the
    /// quadratic task, which has no layout.
    pub fn preset(name: &str) -> Option<Self> {
        let circle = |cx, cy, r| Obstacle::Circle(Disc { cx, cy, r });
        let rect = |x0, y0, x1, y1| Obstacle::Box(Rect { x0, y0, x1, y1 });
        let pole = |x0, y0, x1, y1| Segment { x0, y0, x1, y1 };
        match name {
            NAV_CIRCLES => Some(Layout::Navigation(NavigationLayout {
                obstacles: vec![circle(0.3, 0.5, 0.13), circle(0.62, 0.27, 0.11), circle(0.62, 0.73, 0.11)],
                goal: Disc { cx: 0.92, cy: 0.5, r: 0.05 },
                start: Point { x: 0.0, y: 0.5 },
                decision_lines: 10,
            })),
            NAV_BOXES => Some(Layout::Navigation(NavigationLayout {
                obstacles: vec![rect(0.22, 0.34, 0.4, 0.66), rect(0.55, 0.0, 0.7, 0.37), rect(0.55, 0.63, 0.7, 1.0)],
                goal: Disc { cx: 0.92, cy: 0.5, r: 0.06 },
                start: Point { x: 0.0, y: 0.5 },
                decision_lines: 10,
            })),
            REACHER_FIFTEEN => Some(Layout::Reacher(ReacherLayout {
                links: 15,
                poles: vec![pole(0.6, 0.22, 1.0, 0.22), pole(0.3, 0.7, 0.6, 0.7)],
                goal: Disc { cx: 0.78, cy: 0.42, r: 0.05 },
                max_steps: DEFAULT_REACHER_STEPS,
            })),
            REACHER_THIRTY => Some(Layout::Reacher(ReacherLayout {
                links: 30,
                poles: vec![pole(0.65, 0.25, 1.0, 0.25), pole(0.5, 0.5, 0.5, 0.8)],
                goal: Disc { cx: 0.75, cy: 0.45, r: 0.05 },
                max_steps: DEFAULT_REACHER_STEPS,
            })),
            _ => None,
        }
    }
}

/// Builds a preset environment by name, including the quadratic task.
pub fn build_preset(name: &str) -> Option<Result<Box<dyn Environment>>> {
    if name == QUADRATIC {
        return Some(Ok(Box::new(QuadraticBandit::new(0.3))));
    }
    Layout::preset(name).map(|l| l.build(name))
}
