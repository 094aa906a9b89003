//! Scenario runner for the contact-lab experiments: typed configuration files,
//! CSV artifacts and text/JSON run reports.

pub mod config;
pub mod export;
pub mod report;
pub mod scenarios;

/// Environment variable that supplies the output directory when `--out` is absent.
pub const OUT_ENV: &str = "CONTACT_LAB_OUT";
