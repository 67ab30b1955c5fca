#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrobust::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Iris config writing into `out`, with `extra` appended verbatim.
pub fn iris_config(out: &Path, embedding: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        "seed = 0\nout = {:?}\n[dataset]\nname = \"iris\"\nembedding = \"{embedding}\"\npath = {:?}\n{extra}",
        out.display().to_string(),
        data_dir().join("iris.csv").display().to_string()
    );
    ExperimentConfig::from_toml(&text, out).unwrap()
}

/// Pima-shaped CSV: 768 distinct complete rows, 500 negative and 268 positive.
pub fn synthetic_pid(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut text = String::from("Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,DiabetesPedigreeFunction,Age,Outcome\n");
    for i in 0..768 {
        let y = usize::from(i >= 500);
        let shift = 25.0 * y as f64;
        let _ = writeln!(
            text,
            "{},{:.0},{:.0},{:.0},{:.0},{:.1},{:.3},{},{y}",
            rng.gen_range(0..12),
            rng.gen_range(80.0..140.0) + shift,
            rng.gen_range(50.0..90.0),
            rng.gen_range(10.0..40.0),
            rng.gen_range(20.0..200.0) + 2.0 * shift,
            rng.gen_range(20.0..40.0) + 0.2 * shift,
            rng.gen_range(0.1..1.5),
            21 + i % 50
        );
    }
    std::fs::write(path, text).unwrap();
}
