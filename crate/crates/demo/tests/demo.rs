use semirec_demo::{closure, closure_view, enhance, enhance_view, proximity, proximity_view};

const TOY: &str = "1 1\n1 2\n2 1\n2 2\n2 3\n3 3\n3 4\n";

#[test]
fn proximity_matrices() {
    let v = proximity_view(TOY).unwrap();
    assert_eq!(v.items, vec![1, 2, 3, 4]);
    assert_eq!(v.item_proximity[0][2], Some(1.0 / 3.0));
    assert_eq!(v.item_proximity[2][3], Some(0.5));
    assert_eq!(v.item_proximity[0][3], Some(0.0));
    assert_eq!(v.user_proximity[0][1], Some(2.0 / 3.0));
}

#[test]
fn closure_lists_chain_pair() {
    let v = closure_view(TOY, "item").unwrap();
    assert_eq!(v.direct[0][3], None);
    assert_eq!(v.closed[0][3], Some(3.0));
    let pair = v.pairs.iter().find(|p| (p.a, p.b) == (1, 4)).unwrap();
    assert_eq!(pair.direct, None);
    assert_eq!(pair.b_ab, 1.0 / 3.0);
    assert!(v.b_values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn enhancement_changes_ranking_only_below_threshold() {
    let none = enhance_view(TOY, "item", f64::INFINITY, 1, 2, 5).unwrap();
    assert_eq!(none.inserted, 0);
    let all = enhance_view(TOY, "item", 0.0, 1, 2, 5).unwrap();
    assert!(all.inserted > 0);
    // user 1 holds items 1 and 2; item 4 is reachable only through the closure
    let score4 =
        |r: &[semirec_demo::Ranked]| r.iter().find(|x| x.item == 4).map(|x| x.score).unwrap();
    assert_eq!(score4(&none.after), 0.0);
    assert!(score4(&all.after) > 0.0);
    assert_eq!(
        none.before.iter().map(|r| r.item).collect::<Vec<_>>(),
        all.before.iter().map(|r| r.item).collect::<Vec<_>>()
    );
    assert!(enhance_view(TOY, "user", 0.0, 1, 1, 5).is_ok());
}

#[test]
fn exports_return_json_and_report_errors() {
    let v: serde_json::Value = serde_json::from_str(&proximity(TOY)).unwrap();
    assert!(v["item_proximity"].is_array());
    let v: serde_json::Value = serde_json::from_str(&closure(TOY, "graph")).unwrap();
    assert!(v["error"].as_str().unwrap().contains("unknown graph"));
    let v: serde_json::Value = serde_json::from_str(&proximity("1 x\n")).unwrap();
    assert!(v["error"].as_str().unwrap().contains("line 1"));
    let v: serde_json::Value = serde_json::from_str(&enhance(TOY, "item", 1.0, 99, 1, 3)).unwrap();
    assert!(v["error"].is_string());
}
