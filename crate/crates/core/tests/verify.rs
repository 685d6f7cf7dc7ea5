use fracdim::verify::{run_check, Fault, Plan, Suite, CHECKS};

#[test]
fn cheap_checks_pass_in_the_quick_suite() {
    let plan = Plan::new(Suite::Quick, 2024);
    for id in [1, 2, 5, 6, 9, 10, 12] {
        let r = run_check(id, &plan);
        assert_eq!(r.id, id);
        assert!(r.pass, "check {id} ({}) failed: {}", r.name, r.measured);
    }
}

#[test]
fn check_results_are_reproducible() {
    let plan = Plan::new(Suite::Quick, 7);
    for id in [5, 6, 10] {
        let a = run_check(id, &plan);
        let b = run_check(id, &plan);
        assert_eq!((a.pass, a.measured, a.tolerance), (b.pass, b.measured, b.tolerance));
    }
}

#[test]
fn an_off_by_one_packing_count_is_caught() {
    let plan = Plan {
        fault: Fault::PackingOffByOne,
        ..Plan::new(Suite::Quick, 2024)
    };
    assert!(!run_check(5, &plan).pass);
    assert!(!run_check(6, &plan).pass);
}

#[test]
fn check_table_is_numbered_in_order() {
    for (i, (id, name)) in CHECKS.iter().enumerate() {
        assert_eq!(*id as usize, i + 1);
        assert!(!name.is_empty());
    }
}
