//! The fixed label vocabulary for baseline-epoch datasets.
//!
//! Fifteen metadata variables cover the driving environment, driver
//! demographics, and driver behavior/state. Values directly derived from
//! gaze itself are deliberately absent (predicting glance from glance is
//! circular). The `behavior` and `distraction` variables carry a baseline
//! value (`none` / `not_distracted`) that every other value is paired
//! against during problem enumeration; the remaining variables pair all
//! values.

/// One labeled metadata variable and its admissible values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: &'static str,
    pub values: &'static [&'static str],
    /// Pair only `values[0]` against the rest instead of all pairs.
    pub baseline_only: bool,
}

/// All variables, in canonical order. Problem enumeration and reports follow
/// this ordering.
pub const VARIABLES: &[VariableSpec] = &[
    VariableSpec { name: "weather", values: &["clear", "raining"], baseline_only: false },
    VariableSpec { name: "surface_condition", values: &["wet", "dry"], baseline_only: false },
    VariableSpec {
        name: "lighting",
        values: &["day", "night_lit", "night_unlit"],
        baseline_only: false,
    },
    VariableSpec {
        name: "locality",
        values: &["city", "rural", "interstate"],
        baseline_only: false,
    },
    VariableSpec {
        name: "traffic_density",
        values: &["low", "medium", "high"],
        baseline_only: false,
    },
    VariableSpec { name: "alignment", values: &["straight", "curve"], baseline_only: false },
    VariableSpec { name: "travel_lanes", values: &["le2", "ge3"], baseline_only: false },
    VariableSpec {
        name: "traffic_divider",
        values: &["present", "absent"],
        baseline_only: false,
    },
    VariableSpec {
        name: "traffic_control",
        values: &["present", "absent"],
        baseline_only: false,
    },
    VariableSpec { name: "near_intersection", values: &["yes", "no"], baseline_only: false },
    VariableSpec { name: "seatbelt", values: &["yes", "no"], baseline_only: false },
    VariableSpec { name: "age", values: &["young", "middle", "mature"], baseline_only: false },
    VariableSpec { name: "gender", values: &["male", "female"], baseline_only: false },
    VariableSpec {
        name: "behavior",
        values: &["none", "following_too_closely", "failed_to_signal", "speeding"],
        baseline_only: true,
    },
    VariableSpec {
        name: "distraction",
        values: &["not_distracted", "adjusting_radio", "fatigue", "talking"],
        baseline_only: true,
    },
];

pub fn variable(name: &str) -> Option<&'static VariableSpec> {
    VARIABLES.iter().find(|v| v.name == name)
}

pub fn is_valid_label(variable_name: &str, value: &str) -> bool {
    variable(variable_name).is_some_and(|v| v.values.contains(&value))
}

/// Bin a driver age in years into `young`, `middle`, or `mature`.
///
/// Thresholds are 23.5 and 40.5 years, chosen so integer ages never tie;
/// the (unreachable for integer input) exact thresholds resolve downward.
pub fn bin_age(age_years: f64) -> &'static str {
    if age_years < 23.5 {
        "young"
    } else if age_years <= 40.5 {
        "middle"
    } else {
        "mature"
    }
}
