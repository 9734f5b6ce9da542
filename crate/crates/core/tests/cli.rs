mod common;

use std::process::Command;

use common::{corpus, fixture, golden_dir, run, stem};

fn s(p: &std::path::Path) -> String {
    p.display().to_string()
}

#[test]
fn transform_matches_golden() {
    for path in corpus() {
        for (format, ext) in [("structurizr", "dsl"), ("mermaid", "mmd"), ("dot", "dot")] {
            let (code, out, err) = run(&["transform", &s(&path), "--format", format]);
            assert_eq!(code, 0, "{}: {err}", path.display());
            let golden = std::fs::read_to_string(golden_dir().join(format!("{}.{ext}", stem(&path)))).unwrap();
            assert_eq!(out, golden, "{} {format}", path.display());
        }
    }
}

#[test]
fn meta_and_coverage_match_golden() {
    for path in corpus() {
        let (code, out, _) = run(&["meta", &s(&path)]);
        assert_eq!(code, 0);
        let golden = std::fs::read_to_string(golden_dir().join(format!("{}.meta.yaml", stem(&path)))).unwrap();
        assert_eq!(out, golden);
        let (code, out, _) = run(&["coverage", &s(&path)]);
        assert_eq!(code, 0);
        let golden = std::fs::read_to_string(golden_dir().join(format!("{}.coverage.yaml", stem(&path)))).unwrap();
        assert_eq!(out, golden);
    }
}

#[test]
fn check_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("newsfeed.yml");
    let diagram = dir.path().join("feed.mmd");
    let (code, _, err) = run(&["transform", &s(&input), "--format", "mermaid", "-o", &s(&diagram)]);
    assert_eq!(code, 0, "{err}");

    let (code, out, _) = run(&["check", &s(&input), &s(&diagram)]);
    assert_eq!(code, 0);
    assert!(out.starts_with("consistent: "));

    let text = std::fs::read_to_string(&diagram).unwrap();
    let tampered = text.replace("    worker -->|depends_on| redis\n", "");
    assert_ne!(tampered, text);
    std::fs::write(&diagram, &tampered).unwrap();
    let (code, _, err) = run(&["check", &s(&input), &s(&diagram)]);
    assert_eq!(code, 1);
    let line = text
        .lines()
        .position(|l| l.contains("worker -->|depends_on| redis"))
        .unwrap()
        + 1;
    assert!(
        err.starts_with(&format!("{}:{line}: diagram is not consistent", diagram.display())),
        "{err}"
    );
    assert!(
        err.contains("expected: ") && err.contains("worker -->|depends_on| redis"),
        "{err}"
    );

    let (code, _, err) = run(&["check", "--semantic", &s(&input), &s(&diagram)]);
    assert_eq!(code, 1);
    assert!(err.contains("missing:    edge worker -> redis [depends_on]"), "{err}");
}

#[test]
fn check_uses_recorded_options() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("k8s-deploy-svc.yml");
    let diagram = dir.path().join("shop.txt");
    let args = [
        "transform",
        &s(&input),
        "--format",
        "dot",
        "--orientation",
        "left-right",
        "--system-name",
        "Shop",
        "--no-properties",
        "-o",
        &s(&diagram),
    ];
    assert_eq!(run(&args).0, 0);
    // no extension hint: the header alone identifies format and options
    assert_eq!(run(&["check", &s(&input), &s(&diagram)]).0, 0);
}

#[test]
fn parse_error_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.yml");
    std::fs::write(&bad, "services:\n  web:\n    image: [unclosed\n").unwrap();
    let (code, _, err) = run(&["meta", &s(&bad)]);
    assert_eq!(code, 2);
    assert!(err.starts_with(&format!("{}:", bad.display())), "{err}");
    let (code, _, _) = run(&["meta", "/nonexistent/compose.yml"]);
    assert_eq!(code, 2);
    let unknown = dir.path().join("notes.yml");
    std::fs::write(&unknown, "title: hello\n").unwrap();
    assert_eq!(run(&["meta", &s(&unknown)]).0, 2);
}

#[test]
fn model_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "dep.yml",
            "services:\n  web:\n    image: x\n    depends_on: [ghost]\n",
            4,
        ),
        (
            "cycle.yml",
            "services:\n  a:\n    image: x\n    depends_on: [b]\n  b:\n    image: y\n    depends_on: [a]\n",
            0,
        ),
        (
            "ann.yml",
            "services:\n  web:\n    image: x\n# arch(ghost): type=api\n",
            4,
        ),
        (
            "conflict.yml",
            "# arch(web): type=api\n# arch(web): type=ui\nservices:\n  web:\n    image: x\n",
            0,
        ),
    ];
    for (name, body, line) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        let (code, _, err) = run(&["meta", &s(&p)]);
        assert_eq!(code, 3, "{name}: {err}");
        assert!(err.starts_with(&s(&p)), "{name}: {err}");
        if line > 0 {
            assert!(err.starts_with(&format!("{}:{line}:", p.display())), "{name}: {err}");
        }
    }
}

#[test]
fn lint_exit_codes() {
    let (code, out, _) = run(&["lint", &s(&fixture("newsfeed.yml")), "--format", "structurizr"]);
    assert_eq!(code, 0, "warnings only");
    assert_eq!(out.lines().count(), 2);
    assert!(out.contains("G4 warning document"));
    assert!(out.contains("G5 warning worker"));

    // service -> deployment is `exposes`, deployment -> service `depends_on`:
    // no dependency cycle, but no component is unreferenced either
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("loop.yml");
    std::fs::write(
        &p,
        "apiVersion: apps/v1\nkind: Deployment\nmetadata:\n  name: api\nspec:\n  selector:\n    matchLabels: {app: api}\n  template:\n    metadata:\n      labels: {app: api}\n    spec:\n      containers:\n        - name: api\n          image: x/api:1\n---\napiVersion: v1\nkind: Service\nmetadata:\n  name: api-svc\nspec:\n  selector: {app: api}\n  ports:\n    - port: 80\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("loop.yml.arch"), "arch(api): depends-on=api-svc\n").unwrap();
    let (code, out, err) = run(&["lint", &s(&p), "--yaml"]);
    assert_eq!(code, 1, "{out}{err}");
    assert!(out.starts_with("findings:"));
    assert!(out.contains("rule: G4") && out.contains("severity: error"), "{out}");

    let table = dir.path().join("tech.yml");
    std::fs::write(&table, "app-image: worker\n").unwrap();
    let (_, out, _) = run(&["lint", &s(&fixture("newsfeed.yml")), "--tech-table", &s(&table)]);
    assert!(!out.contains("G5"), "{out}");
}

#[test]
fn lint_missing_legend_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("simple-api-compose.yml");
    let diagram = dir.path().join("d.dot");
    assert_eq!(
        run(&["transform", &s(&input), "--format", "dot", "-o", &s(&diagram)]).0,
        0
    );
    let text = std::fs::read_to_string(&diagram).unwrap();
    let stripped: String = text
        .lines()
        .filter(|l| !l.contains("legend"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&diagram, stripped).unwrap();
    let (code, out, _) = run(&["lint", &s(&input), "--diagram", &s(&diagram)]);
    assert_eq!(code, 1);
    assert!(out.contains("G2 error document"), "{out}");
}

#[test]
fn frontend_detection_and_override() {
    for path in corpus() {
        let (code, _, err) = run(&["meta", &s(&path)]);
        assert_eq!(code, 0, "{}: {err}", path.display());
    }
    let (code, _, _) = run(&["meta", "--frontend", "terraform", &s(&fixture("newsfeed.yml"))]);
    assert_ne!(code, 0);
    let (code, _, _) = run(&["meta", "--frontend", "kubernetes", &s(&fixture("simple-api-pod.yml"))]);
    assert_eq!(code, 0);
}

#[test]
fn extra_annotation_files() {
    let dir = tempfile::tempdir().unwrap();
    let extra = dir.path().join("extra.arch");
    std::fs::write(&extra, "arch(*): entrypoint=nginx\n").unwrap();
    let input = s(&fixture("newsfeed.yml"));
    let (_, out, _) = run(&["meta", &input, "--annotations", &s(&extra)]);
    assert!(out.contains("entrypoint: nginx"), "{out}");
    let (_, out, _) = run(&["lint", &input, "--annotations", &s(&extra)]);
    assert!(!out.contains("G4"), "{out}");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["transform", "x.yml"]).0, 2, "--format is required");
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_archgen");
    let ok = Command::new(bin)
        .args(["meta", &s(&fixture("simple-api-pod.yml"))])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("components:"));
    let missing = Command::new(bin).args(["meta", "/nonexistent.yml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
}
