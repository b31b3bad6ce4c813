use fpl::plots;
use fpl::svg::{heat_colour, heatmap, line_plot, Heatmap, LinePlot, Series};
use fpl_core::spectral::FilterRecord;

fn cell_colours(svg: &str, row: usize) -> Vec<(usize, (u8, u8, u8))> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.contains("class=\"cell\"")) {
        let attr = |name: &str| -> &str {
            let start = line.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            &line[start..start + line[start..].find('"').unwrap()]
        };
        if attr("data-row").parse::<usize>().unwrap() != row {
            continue;
        }
        let fill = attr("fill");
        let c = |i: usize| u8::from_str_radix(&fill[1 + 2 * i..3 + 2 * i], 16).unwrap();
        out.push((attr("data-col").parse().unwrap(), (c(0), c(1), c(2))));
    }
    out.sort();
    out
}

#[test]
fn monotone_error_gives_monotone_colours() {
    let records: Vec<FilterRecord> = (0..12)
        .map(|i| FilterRecord { epoch: 5 * i, delta: 3.0, e_low: 1.0 / (1.0 + i as f64), e_high: 0.9, dist: 0.0 })
        .collect();
    let svg = plots::filter_heatmap("filtering", &records).unwrap();
    let cells = cell_colours(&svg, 0);
    assert_eq!(cells.len(), 12);
    // falling e_low: red falls and blue rises along the row
    for w in cells.windows(2) {
        let ((_, a), (_, b)) = (w[0], w[1]);
        assert!(b.0 <= a.0 && b.2 >= a.2, "{cells:?}");
    }
    assert_eq!(cells[0].1, heat_colour(1.0));
    assert!(svg.contains("class=\"colour-range\""));
}

#[test]
fn same_trace_same_bytes() {
    let plot = LinePlot {
        title: "t".into(),
        x_label: "epoch".into(),
        y_label: "loss".into(),
        log_x: false,
        log_y: true,
        series: vec![Series { name: "a".into(), points: (1..50).map(|i| (i as f64, 1.0 / i as f64)).collect() }],
    };
    assert_eq!(line_plot(&plot).unwrap(), line_plot(&plot).unwrap());
    assert!(line_plot(&plot).unwrap().contains("epoch"));
}

#[test]
fn empty_inputs_are_errors() {
    let empty = LinePlot {
        title: "t".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        log_x: false,
        log_y: false,
        series: vec![Series { name: "a".into(), points: vec![] }],
    };
    assert!(line_plot(&empty).is_err());
    assert!(plots::filter_heatmap("f", &[]).is_err());
    let bad = Heatmap {
        title: "h".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        columns: vec!["1".into()],
        rows: vec!["r".into()],
        values: vec![vec![1.0, 2.0]],
    };
    assert!(heatmap(&bad).is_err());
}
