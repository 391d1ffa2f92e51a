#![allow(dead_code)]

use codazzi_core::geometry::{ChartManifold, PointFrame};

pub fn chart(coords: &[&str], metric: &[(&str, &str, &str)]) -> ChartManifold {
    ChartManifold::parse(coords, metric).unwrap()
}

pub fn flat(n: usize) -> ChartManifold {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let diag: Vec<(&str, &str, &str)> = refs.iter().map(|c| (*c, *c, "1")).collect();
    chart(&refs, &diag)
}

pub fn sphere() -> ChartManifold {
    chart(&["th", "ph"], &[("th", "th", "1"), ("ph", "ph", "sin(th)^2")])
}

pub fn s3() -> ChartManifold {
    chart(
        &["c", "t", "p"],
        &[
            ("c", "c", "1"),
            ("t", "t", "sin(c)^2"),
            ("p", "p", "sin(c)^2*sin(t)^2"),
        ],
    )
}

pub fn s2xs2() -> ChartManifold {
    chart(
        &["t1", "p1", "t2", "p2"],
        &[
            ("t1", "t1", "1"),
            ("p1", "p1", "sin(t1)^2"),
            ("t2", "t2", "4"),
            ("p2", "p2", "4*sin(t2)^2"),
        ],
    )
}

/// dt² + (2 + sin t)²(dx² + dy² + dz²).
pub fn warped() -> ChartManifold {
    let f2 = "(2 + sin(t))^2";
    chart(
        &["t", "x", "y", "z"],
        &[("t", "t", "1"), ("x", "x", f2), ("y", "y", f2), ("z", "z", f2)],
    )
}

/// Flat R⁴ with a cubic bump in one metric entry.
pub fn bump() -> ChartManifold {
    chart(
        &["x1", "x2", "x3", "x4"],
        &[
            ("x1", "x1", "1"),
            ("x2", "x2", "1 + 0.1*x1^3"),
            ("x3", "x3", "1"),
            ("x4", "x4", "1"),
        ],
    )
}

/// A 4D metric with no special structure.
pub fn generic4() -> ChartManifold {
    chart(
        &["x1", "x2", "x3", "x4"],
        &[
            ("x1", "x1", "1 + 0.1*x2^2"),
            ("x2", "x2", "1 + 0.1*x1^3"),
            ("x3", "x3", "1 + 0.1*x1*x4^2"),
            ("x4", "x4", "1 + 0.1*x3^2*x2"),
            ("x1", "x3", "0.05*x2*x4"),
        ],
    )
}

pub const POINTS_2: [[f64; 2]; 5] = [[0.4, 0.1], [0.9, 1.3], [1.2, -0.7], [1.5, 2.0], [2.2, 0.3]];
pub const POINTS_3: [[f64; 3]; 5] = [
    [0.5, 0.6, 0.1],
    [0.9, 1.1, 1.0],
    [1.2, 0.4, -0.7],
    [1.7, 2.0, 2.5],
    [2.3, 1.4, 0.3],
];
pub const POINTS_4: [[f64; 4]; 5] = [
    [0.5, 0.3, 0.9, 0.2],
    [0.9, 1.1, 1.3, -0.4],
    [1.2, 0.7, 0.6, 1.0],
    [0.7, 1.9, 2.1, 0.5],
    [1.4, 0.4, 1.7, -1.1],
];

pub fn frames(m: &ChartManifold, points: &[&[f64]]) -> Vec<PointFrame> {
    points.iter().map(|p| m.frame(p).unwrap()).collect()
}

pub fn frames4(m: &ChartManifold) -> Vec<PointFrame> {
    POINTS_4.iter().map(|p| m.frame(p).unwrap()).collect()
}

pub fn frames3(m: &ChartManifold) -> Vec<PointFrame> {
    POINTS_3.iter().map(|p| m.frame(p).unwrap()).collect()
}

pub fn frames2(m: &ChartManifold) -> Vec<PointFrame> {
    POINTS_2.iter().map(|p| m.frame(p).unwrap()).collect()
}
