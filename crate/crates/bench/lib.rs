//! Shared fixtures for the criterion benches.

use falconer_core::{build_cantor, build_product, CantorSpec, GridMeasure, ProductMeasure};

pub fn middle_thirds(level: u32) -> GridMeasure {
    build_cantor(&CantorSpec::middle_thirds(level)).expect("valid spec")
}

pub fn middle_thirds_square(level: u32) -> ProductMeasure {
    let m = middle_thirds(level);
    let a = m.dimension_hint().unwrap();
    build_product(vec![m.clone(), m], vec![a, a]).expect("two factors")
}
