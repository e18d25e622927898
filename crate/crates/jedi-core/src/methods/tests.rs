use super::*;
use crate::archive::Centroids;
use crate::env::{SyntheticKind, SyntheticTask};
use crate::es::{Engine, EsConfig};
use crate::scoring::AlphaSchedule;

fn sphere(dim: usize) -> SyntheticTask {
    SyntheticTask::new(SyntheticKind::Sphere, dim)
}

fn jedi_config(dim: usize, budget: u64) -> JediConfig {
    JediConfig {
        n_init: 32,
        n_es: 2,
        loops: None,
        es_generations: 10,
        es: EsConfig::new(Engine::SepCma, dim),
        alpha: AlphaSchedule::Linear { start: 0.8, end: 0.0 },
        selection: SelectionMode::WeightedGp,
        eval_budget: budget,
    }
}

fn centroids() -> Centroids {
    Centroids::build(64, 1)
}

#[test]
fn jedi_accounting_is_exact() {
    let task = sphere(4);
    let mut config = jedi_config(4, 1_000_000);
    config.n_init = 8;
    config.n_es = 1;
    config.loops = Some(1);
    config.es_generations = 1;
    let r = jedi_run(&config, &task, centroids(), 3).unwrap();
    assert_eq!(r.evaluations_used, 8 + 16);
    assert_eq!(r.repertoire.total_evaluations(), 24);
    assert_eq!(r.rows.last().unwrap().evaluations, 24);
}

#[test]
fn budget_below_n_init_is_a_config_error() {
    let task = sphere(4);
    let mut config = jedi_config(4, 16);
    config.n_init = 32;
    assert_eq!(
        jedi_run(&config, &task, centroids(), 0).unwrap_err(),
        RunError::Config("eval_budget smaller than n_init")
    );
}

#[test]
fn invalid_alpha_is_rejected() {
    let task = sphere(4);
    let mut config = jedi_config(4, 1_000);
    config.alpha = AlphaSchedule::Constant(1.5);
    assert_eq!(
        jedi_run(&config, &task, centroids(), 0).unwrap_err(),
        RunError::Config("alpha out of [0,1]")
    );
}

#[test]
fn uniform_selection_with_zero_alpha_degenerates_to_multistart_es() {
    let task = sphere(6);
    let mut config = jedi_config(6, 3_000);
    config.selection = SelectionMode::Uniform;
    config.alpha = AlphaSchedule::Constant(0.0);
    let r = jedi_run(&config, &task, centroids(), 11).unwrap();
    assert!(r.evaluations_used <= 3_000);
    // Pure fitness scoring on the sphere improves on random init.
    assert!(r.best_result.fitness > -1.0, "{}", r.best_result.fitness);
}

#[test]
fn all_selection_modes_complete() {
    let task = sphere(4);
    for mode in [SelectionMode::WeightedGp, SelectionMode::StandardGp, SelectionMode::Uniform] {
        let mut config = jedi_config(4, 2_000);
        config.selection = mode;
        let r = jedi_run(&config, &task, centroids(), 5).unwrap();
        assert!(r.evaluations_used <= 2_000);
    }
}

#[test]
fn jedi_is_deterministic_given_seed() {
    let task = sphere(5);
    let config = jedi_config(5, 2_500);
    let a = jedi_run(&config, &task, centroids(), 42).unwrap();
    let b = jedi_run(&config, &task, centroids(), 42).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.best_genome, b.best_genome);
    assert_eq!(a.best_result, b.best_result);
    let c = jedi_run(&config, &task, centroids(), 43).unwrap();
    assert_ne!(a.best_genome, c.best_genome);
}

#[test]
fn every_buffered_evaluation_lands_in_the_repertoire() {
    let task = sphere(4);
    let config = jedi_config(4, 2_000);
    let r = jedi_run(&config, &task, centroids(), 9).unwrap();
    assert_eq!(r.repertoire.total_evaluations(), r.evaluations_used);
}

fn check_monotone_series(rows: &[MetricRow]) {
    for pair in rows.windows(2) {
        assert!(pair[1].evaluations > pair[0].evaluations, "evals not strictly increasing");
        assert!(pair[1].best_fitness >= pair[0].best_fitness, "best regressed");
        assert!(pair[1].coverage >= pair[0].coverage, "coverage regressed");
    }
}

#[test]
fn metric_series_are_monotone_for_all_methods() {
    let task = sphere(4);
    let jedi = jedi_run(&jedi_config(4, 2_000), &task, centroids(), 7).unwrap();
    check_monotone_series(&jedi.rows);

    let me = map_elites_run(
        &MapElitesConfig { n_init: 32, eval_budget: 2_000, ..Default::default() },
        &task,
        centroids(),
        7,
    )
    .unwrap();
    check_monotone_series(&me.rows);

    let es = es_search_run(
        &EsSearchConfig {
            es: EsConfig::new(Engine::SepCma, 4),
            restart: true,
            eval_budget: 2_000,
        },
        &task,
        centroids(),
        7,
    )
    .unwrap();
    check_monotone_series(&es.rows);
}

#[test]
fn frozen_variation_freezes_coverage() {
    let task = sphere(4);
    let config = MapElitesConfig {
        n_init: 64,
        batch: 32,
        iso_sigma: 0.0,
        line_sigma: 0.0,
        eval_budget: 1_000,
    };
    let r = map_elites_run(&config, &task, centroids(), 3).unwrap();
    let after_init = r.rows.first().unwrap().coverage;
    assert_eq!(r.rows.last().unwrap().coverage, after_init);
    // Offspring equal parents, so elites never improve either.
    assert_eq!(r.rows.last().unwrap().best_fitness, r.rows.first().unwrap().best_fitness);
}

#[test]
fn map_elites_improves_and_stays_in_budget() {
    let task = sphere(4);
    let config = MapElitesConfig { n_init: 32, eval_budget: 3_000, ..Default::default() };
    let r = map_elites_run(&config, &task, centroids(), 5).unwrap();
    assert!(r.evaluations_used <= 3_000);
    assert_eq!(r.repertoire.total_evaluations(), r.evaluations_used);
    assert!(r.rows.last().unwrap().coverage > r.rows.first().unwrap().coverage);
}

#[test]
fn es_restart_fires_after_convergence() {
    // The sphere flattens as sigma shrinks, so a long budget forces at
    // least one restart.
    let task = sphere(3);
    let config = EsSearchConfig {
        es: EsConfig::new(Engine::SepCma, 3),
        restart: true,
        eval_budget: 40_000,
    };
    let r = es_search_run(&config, &task, centroids(), 1).unwrap();
    assert!(r.restarts >= 1, "no restart in {} evals", r.evaluations_used);
    let no_restart = es_search_run(
        &EsSearchConfig { restart: false, ..config },
        &task,
        centroids(),
        1,
    )
    .unwrap();
    assert_eq!(no_restart.restarts, 0);
}

#[test]
fn es_logs_all_evaluations_for_coverage() {
    let task = sphere(4);
    let config = EsSearchConfig {
        es: EsConfig::new(Engine::SepCma, 4),
        restart: false,
        eval_budget: 1_000,
    };
    let r = es_search_run(&config, &task, centroids(), 2).unwrap();
    assert_eq!(r.repertoire.total_evaluations(), r.evaluations_used);
    assert_eq!(r.evaluations_used, 1_000 - 1_000 % 16);
}
