use intermap::harness::cache::{cache_matrix, cache_path, CacheStatus};
use intermap::harness::{run, ExperimentConfig, FileConfig, Overrides};
use intermap::{Alpha, MapSpec, PhaseModel, Variant};

#[test]
fn experiment_through_cache_matches_uncached() {
    let cache = tempfile::tempdir().unwrap();
    let toml = |cached: bool| {
        let mut s = String::from(
            "n_qubits = 5\nvariant = \"isrm-nonsym\"\nensemble = 3\niterate_start = 50\niterate_width = 4\n",
        );
        if cached {
            s.push_str(&format!("cache_dir = {:?}\n", cache.path()));
        }
        s
    };
    let go = |cached: bool| {
        let cfg = ExperimentConfig::resolve(
            FileConfig::from_toml(&toml(cached)).unwrap(),
            Overrides {
                experiment: Some("iterates".into()),
                ..Default::default()
            },
        )
        .unwrap();
        let out = run(&cfg).unwrap();
        out.tables.iter().map(|t| t.to_csv().unwrap()).collect::<Vec<_>>()
    };
    let plain = go(false);
    let first = go(true);
    let second = go(true);
    assert_eq!(plain, first);
    assert_eq!(first, second);
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 3);
}

#[test]
fn stale_file_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let spec = MapSpec::new(
        4,
        Alpha::rational(1, 5).unwrap(),
        Variant::IsrmSymmetric,
        PhaseModel::Uniform,
        3,
    )
    .unwrap();
    let (m, s) = cache_matrix(dir.path(), &spec, 0, 12).unwrap();
    assert_eq!(s, CacheStatus::Miss);
    std::fs::write(cache_path(dir.path(), &spec, 0), b"IQMP garbage").unwrap();
    let (again, s) = cache_matrix(dir.path(), &spec, 0, 12).unwrap();
    assert_eq!(s, CacheStatus::Miss);
    assert_eq!(m, again);
    assert_eq!(cache_matrix(dir.path(), &spec, 0, 12).unwrap().1, CacheStatus::Hit);
}
