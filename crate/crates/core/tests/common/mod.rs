#![allow(dead_code)]
pub mod labels;
pub mod oracle;
pub mod trends;
