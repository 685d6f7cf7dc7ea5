use fracdim_web::{alpha_curve_json, box_counts_json, levels_json, MAX_DRAWN};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.expect("export succeeds")).unwrap()
}

#[test]
fn levels_are_nested_and_sorted() {
    let v = parse(levels_json("homogeneous", r#"{"lo":0.2,"hi":0.3}"#, 4, 6, -12.0));
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 7);
    assert_eq!(levels[0]["intervals"][0], serde_json::json!([0.0, 1.0]));
    for level in levels {
        let ivs = level["intervals"].as_array().unwrap();
        assert_eq!(ivs.len(), level["alive"].as_u64().unwrap() as usize);
        for w in ivs.windows(2) {
            assert!(w[0][1].as_f64().unwrap() <= w[1][0].as_f64().unwrap());
        }
    }
}

#[test]
fn wide_levels_are_clipped() {
    let v = parse(levels_json("example1", r#"{"p":1}"#, 1, 2, -200.0));
    for level in v["levels"].as_array().unwrap() {
        assert!(level["intervals"].as_array().unwrap().len() <= MAX_DRAWN);
        assert_eq!(level["clipped"].as_bool().unwrap(), level["alive"].as_u64().unwrap() as usize > MAX_DRAWN);
    }
}

#[test]
fn bad_inputs_are_reported() {
    assert!(levels_json("cantor", "{not json", 0, 3, -12.0).is_err());
    assert!(levels_json("nope", "", 0, 3, -12.0).is_err());
    assert!(levels_json("cantor", "", 0, 17, -12.0).is_err());
    assert!(box_counts_json("orbit_set", r#"{"p":1}"#, 0, 0, -12.0, 1e-6, 1e-2, 0.0).is_err());
    assert!(alpha_curve_json("cantor", "", 0.5, 0.1, 10).is_err());
}

#[test]
fn box_counts_of_the_orbit_set() {
    let v = parse(box_counts_json("orbit_set", r#"{"p":1}"#, 0, 0, -12.0, 1e-6, 1e-2, 0.01));
    assert!((v["estimate"]["slope"].as_f64().unwrap() - 0.5).abs() < 0.03);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["N_r"].as_u64().unwrap() <= r["P_r"].as_u64().unwrap() * 3));
}

#[test]
fn box_counts_of_a_cantor_set() {
    let v = parse(box_counts_json("cantor", r#"{"ratio":0.25,"arity":2}"#, 0, 10, -12.0, 1e-6, 1e-1, 0.01));
    assert_eq!(v["cells"], 1024);
    assert!((v["estimate"]["slope"].as_f64().unwrap() - 0.5).abs() < 0.05);
}

#[test]
fn alpha_curve_crosses_one_at_alpha() {
    let v = parse(alpha_curve_json("cantor", r#"{"ratio":0.3333333333,"arity":2}"#, 0.1, 1.0, 91));
    let alpha = v["alpha"].as_f64().unwrap();
    assert!((alpha - 2f64.ln() / 3f64.ln()).abs() < 1e-6);
    let betas = v["betas"].as_array().unwrap();
    let his = v["hi"].as_array().unwrap();
    assert_eq!(betas.len(), 91);
    for (b, h) in betas.iter().zip(his) {
        let (b, h) = (b.as_f64().unwrap(), h.as_f64().unwrap());
        assert_eq!(h > 1.0, b < alpha, "beta {b}");
    }
    let sub = parse(alpha_curve_json("cantor", r#"{"ratio":0.5,"arity":1}"#, 0.1, 1.0, 5));
    assert!(sub["alpha"].is_null() && sub["note"].is_string());
}
