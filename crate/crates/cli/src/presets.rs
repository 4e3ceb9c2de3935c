//! Built-in experiments.

use std::f64::consts::PI;

use num_complex::Complex64;
use pointscat::fixtures::{
    amss_layout, axis_directions, circle_directions, five_source_strength_direction, five_sources,
    single_sources, tetra_sensors,
};
use pointscat::forward::{FrequencyGrid, PointConfiguration, SensorKind};
use pointscat::{Dimension, Point};

use crate::config::{
    ExperimentConfig, GridSpec, Method, MethodParams, NoiseSpec, Problem, SensorSpec,
    CONFIG_SCHEMA_VERSION,
};

pub const NAMES: [&str; 6] = ["table1", "table2", "table3", "five-sources", "amss", "music"];

fn base(name: &str, configuration: PointConfiguration, sensors: SensorSpec, frequencies: FrequencyGrid, method: Method) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        name: name.into(),
        problem: Problem::Sources,
        configuration: Some(configuration),
        configuration_file: None,
        sensors,
        frequencies,
        noise: NoiseSpec::default(),
        method,
        grid: None,
        params: MethodParams::default(),
    }
}

fn near_band() -> FrequencyGrid {
    FrequencyGrid::Band { k_lo: 1.0, k_hi: 100.0, dk: 0.005 }
}

fn first_single() -> PointConfiguration {
    let (z, tau) = single_sources()[0];
    PointConfiguration::from_pairs(Dimension::Three, &[(z, tau)]).expect("valid fixture")
}

fn tetra() -> SensorSpec {
    SensorSpec {
        kind: SensorKind::Near,
        dim: Dimension::Three,
        circle: None,
        entries: tetra_sensors().to_vec(),
    }
}

fn square(half: f64, spacing: f64) -> GridSpec {
    GridSpec {
        lower: Point::new2(-half, -half),
        upper: Point::new2(half, half),
        spacing,
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "table1" => {
            let mut c = base(name, first_single(), tetra(), near_band(), Method::Phaseless);
            c.grid = Some(GridSpec {
                lower: Point::new3(-0.5, -0.5, -0.5),
                upper: Point::new3(1.5, 1.5, 1.5),
                spacing: 0.05,
            });
            c
        }
        "table2" => base(name, first_single(), tetra(), near_band(), Method::Trilaterate),
        "table3" => base(
            name,
            first_single(),
            SensorSpec {
                kind: SensorKind::Far,
                dim: Dimension::Three,
                circle: None,
                entries: axis_directions().to_vec(),
            },
            near_band(),
            Method::SingleFar,
        ),
        "five-sources" => {
            let d = five_source_strength_direction();
            let cfg = PointConfiguration::from_pairs(Dimension::Two, &five_sources()).expect("valid fixture");
            let mut c = base(
                name,
                cfg,
                SensorSpec {
                    kind: SensorKind::Far,
                    dim: Dimension::Two,
                    circle: Some(8),
                    entries: vec![d, -d],
                },
                FrequencyGrid::Band { k_lo: 40.0, k_hi: 200.0, dk: 1.0 },
                Method::MultiIndicator,
            );
            c.noise = NoiseSpec { level: 0.1, seed: 0 };
            c.grid = Some(square(2.0, 0.05));
            c.params.indicator_directions = Some(circle_directions(8));
            c.params.strength_direction = Some(d);
            c
        }
        "amss" => {
            let pairs: Vec<(Point, Complex64)> = amss_layout()
                .into_iter()
                .map(|z| (z, Complex64::new(1.0, 0.0)))
                .collect();
            let cfg = PointConfiguration::from_pairs(Dimension::Two, &pairs).expect("valid fixture");
            let mut c = base(
                name,
                cfg,
                SensorSpec {
                    kind: SensorKind::Far,
                    dim: Dimension::Two,
                    circle: Some(32),
                    entries: Vec::new(),
                },
                FrequencyGrid::Band { k_lo: 40.0, k_hi: 200.0, dk: 1.0 },
                Method::MultiIndicator,
            );
            c.noise = NoiseSpec { level: 0.1, seed: 0 };
            c.grid = Some(square(2.0, 0.05));
            c
        }
        "music" => {
            let d = five_source_strength_direction();
            let cfg = PointConfiguration::from_pairs(Dimension::Two, &five_sources()).expect("valid fixture");
            let mut c = base(
                name,
                cfg,
                SensorSpec {
                    kind: SensorKind::Far,
                    dim: Dimension::Two,
                    circle: Some(8),
                    entries: vec![d],
                },
                FrequencyGrid::Equidistant { k_min: PI / 3.0, count: 21 },
                Method::Music,
            );
            c.grid = Some(square(1.5, 0.05));
            c.params.m_bound = Some(5);
            c.params.radius = Some(1.5);
            c.params.strength_direction = Some(d);
            c
        }
        _ => return None,
    };
    Some(cfg)
}
