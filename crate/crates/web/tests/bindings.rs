use mukai_web::{charge_json, euler_series_json, fixed_locus_json};
use serde_json::json;

#[test]
fn euler_series_for_order_eleven() {
    let v = euler_series_json("1^2 11^2", 8, Some(8)).unwrap();
    assert_eq!(v["coefficients"], json!([1, 2, 5, 10, 20, 36, 65, 110]));
    assert_eq!(v["euler_characteristic"], json!(36));
    assert_eq!(v["oracle"]["eigenvalue_product_agrees"], json!(true));
}

#[test]
fn euler_series_rejects_bad_input() {
    assert!(euler_series_json("1^5", 8, None).is_ok());
    assert!(euler_series_json("1^24", 0, None).is_err());
    assert!(euler_series_json("banana", 8, None).is_err());
    assert!(euler_series_json("1^24", 8, Some(3)).is_err());
}

#[test]
fn fixed_locus_profile_for_genus_two() {
    let v = fixed_locus_json("genus2", "(0, 2H, 0)").unwrap();
    let counts: Vec<u64> = v["classes"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![1, 63, 56, 1, 378, 28]);
    assert!(fixed_locus_json("genus2", "(0, 2X, 0)").is_err());
    assert!(fixed_locus_json("nope", "(0, H, 0)").is_err());
}

#[test]
fn charge_and_genericity() {
    let v = charge_json("genus2", "Lambda", "H", "1/3*H", "(0, H, 0)", false).unwrap();
    assert_eq!(v["charge"]["positive_plane"], json!(true));
    assert_eq!(v["genericity"]["generic"], json!(true));
    let outside = charge_json("genus2", "Lambda", "H", "0", "(0, H, 0)", false).unwrap();
    assert_eq!(outside["charge"]["distinguished_domain"]["inside"], json!(false));
    assert!(charge_json("genus2", "Lambda", "H", "0", "(0, 2H, 0)", false).is_err());
}

#[test]
fn exports_wrap_errors_as_json() {
    let s = mukai_web::fixed_locus_profile("genus2", "(1,2)");
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!(v["error"].is_string());
    let list: Vec<String> = serde_json::from_str(&mukai_web::fixture_list()).unwrap();
    assert!(list.contains(&"genus2".to_string()));
}
