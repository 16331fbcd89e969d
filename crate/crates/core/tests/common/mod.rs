//! Independent reference computations shared by the integration tests and
//! the acceptance suite.
#![allow(dead_code)]

pub mod airy_series;
pub mod thermal_cases;
