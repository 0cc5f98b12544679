//! Scenario files bundled into the binary.

pub const CATALOG: &[(&str, &str)] = &[
    ("box_stationary", include_str!("../scenarios/box_stationary.toml")),
    ("chsh", include_str!("../scenarios/chsh.toml")),
    ("comb", include_str!("../scenarios/comb.toml")),
    ("delta_gaussian", include_str!("../scenarios/delta_gaussian.toml")),
    ("delta_single", include_str!("../scenarios/delta_single.toml")),
    ("free_2d", include_str!("../scenarios/free_2d.toml")),
    ("free_single", include_str!("../scenarios/free_single.toml")),
    ("ho_single", include_str!("../scenarios/ho_single.toml")),
    ("ho_stationary", include_str!("../scenarios/ho_stationary.toml")),
    ("ring_plane_wave", include_str!("../scenarios/ring_plane_wave.toml")),
    ("sphere_meridian", include_str!("../scenarios/sphere_meridian.toml")),
    ("two_slit", include_str!("../scenarios/two_slit.toml")),
    ("two_slit_unequal", include_str!("../scenarios/two_slit_unequal.toml")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
