//! Twelve problems lose demand, nine do not: the Bonferroni t-table should
//! separate them in nearly every seed.

use regimecast::commands::compare_records;
use regimecast::config::PipelineConfig;
use regimecast::incidents::{drop_set, gen_incidents, IncidentSpec};
use regimecast_core::hypothesis::multi_compare;
use regimecast_core::synth::Stream;

const SEEDS: u64 = 40;

fn separated(rejected: &[&str], drops: &[&str]) -> bool {
    let hits = rejected.iter().filter(|p| drops.contains(p)).count();
    let false_alarms = rejected.len() - hits;
    hits >= drops.len() - 1 && false_alarms <= 1
}

#[test]
fn incident_tables_flag_the_drop_set() {
    let cfg = PipelineConfig::default();
    let drops = drop_set();
    let mut good = 0;
    for seed in 0..SEEDS {
        let records = gen_incidents(&IncidentSpec::new(seed)).unwrap();
        let (report, errors) = compare_records(&records, &cfg).unwrap();
        assert!(errors.is_empty(), "{errors:?}");
        let table = report.t_tests.ok().unwrap();
        assert_eq!(table.m, 21);
        good += separated(&table.rejected(), &drops) as u64;
        assert!(report.anova.ok().unwrap().p < 0.01);
    }
    assert!(good as f64 >= 0.95 * SEEDS as f64, "{good}/{SEEDS}");
}

#[test]
fn normal_samples_at_period_scale() {
    // daily counts ~ N(mean, sd) with 442 days before and 233 after
    let means: Vec<f64> = (0..21).map(|i| 8.0 + i as f64).collect();
    let mut good = 0;
    for seed in 0..200 {
        let mut s = Stream::new(seed);
        let family: Vec<(String, Vec<f64>, Vec<f64>)> = means
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let after = if i < 12 { 0.8 * m } else { m };
                let sd = m.sqrt();
                let a = (0..442).map(|_| s.normal(m, sd)).collect();
                let b = (0..233).map(|_| s.normal(after, sd)).collect();
                (format!("p{i:02}"), a, b)
            })
            .collect();
        let out = multi_compare(&family, 0.05).unwrap();
        let rejected: Vec<&str> = out
            .iter()
            .filter(|c| c.outcome.as_ref().unwrap().reject)
            .map(|c| c.problem.as_str())
            .collect();
        let drops: Vec<String> = (0..12).map(|i| format!("p{i:02}")).collect();
        let drops: Vec<&str> = drops.iter().map(String::as_str).collect();
        good += separated(&rejected, &drops) as u32;
    }
    assert!(good >= 190, "{good}/200");
}
