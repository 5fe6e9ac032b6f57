use chrono::NaiveDate;
use wikitopics::ingest::{Category, ClickRecord, ClickTable, EventRecord, Month};
use wikitopics::network::{build_event_network, window_month_days, NetworkConfig};

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn click(source: &str, target: &str, month: Month, count: u64) -> ClickRecord {
    ClickRecord {
        source: source.into(),
        target: target.into(),
        month,
        count,
    }
}

fn event(on: NaiveDate, core: &[&str]) -> EventRecord {
    EventRecord {
        event_id: "e".into(),
        date: on,
        category: Category::DisastersAccidents,
        description: String::new(),
        core_articles: core.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn mid_january_window_spans_three_months() {
    let m = |y, mm| Month::new(y, mm).unwrap();
    assert_eq!(
        window_month_days(date(2018, 1, 16), 61),
        vec![(m(2017, 12), 15), (m(2018, 1), 31), (m(2018, 2), 15)]
    );
}

#[test]
fn weights_average_months_by_window_days() {
    // 2018-05-01: April 1..30 holds 30 window days, May 1..31 holds 31
    let days = window_month_days(date(2018, 5, 1), 61);
    let apr = Month::new(2018, 4).unwrap();
    let may = Month::new(2018, 5).unwrap();
    assert_eq!(days, vec![(apr, 30), (may, 31)]);
    let mut clicks = ClickTable::new();
    // 122·30/61 + 61·31/61 = 91, dropped
    clicks.insert(click("Core", "Weak", apr, 122));
    clicks.insert(click("Core", "Weak", may, 61));
    // 244·30/61 + 61·31/61 = 151, kept
    clicks.insert(click("Strong", "Core", apr, 244));
    clicks.insert(click("Strong", "Core", may, 61));
    // outside the window
    clicks.insert(click("Core", "Later", Month::new(2018, 7).unwrap(), 10_000));
    let net = build_event_network(&event(date(2018, 5, 1), &["Core"]), &clicks, &NetworkConfig::default());
    assert_eq!(net.graph.labels(), ["Core", "Strong"]);
    assert_eq!(net.graph.edges().len(), 1);
    assert!((net.graph.edges()[0].weight - 151.0).abs() < 1e-9);
}

#[test]
fn isolated_core_article_leaves_an_empty_network() {
    let mut clicks = ClickTable::new();
    clicks.insert(click("Core", "Other", Month::new(2018, 5).unwrap(), 50));
    let net = build_event_network(&event(date(2018, 5, 15), &["Core"]), &clicks, &NetworkConfig::default());
    assert!(net.is_degenerate());
    assert_eq!(net.dropped_core, ["Core"]);
}
