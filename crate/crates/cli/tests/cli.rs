use std::path::PathBuf;
use std::process::{Command, Output};

use scheme_forge::schemes::{parse_scheme, verify_scheme};
use scheme_forge::spectral::{cometric_orderings, eigendata, krein_tensor};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scheme-forge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scheme-forge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn golden_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/appendix.golden").to_string()
}

#[test]
fn verify_k2_and_linked_hosi() {
    let f = temp("k2.txt", "scheme v=2 d=1\n0 1\n1 0\n");
    let o = run(&["verify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("scheme v=2 d=1"));
    let o = run(&["verify", "linked-hosi"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("scheme v=150 d=4"));
}

#[test]
fn verify_reports_witnesses() {
    let t = scheme_forge::constructions::hamming(3, 2).unwrap();
    let mut lines: Vec<String> = t.to_text().lines().map(String::from).collect();
    // cells (0,1) and (1,0) move from class 1 to class 2
    let swap = |line: &str, col: usize| {
        let mut c: Vec<&str> = line.split(' ').collect();
        assert_eq!(c[col], "1");
        c[col] = "2";
        c.join(" ")
    };
    lines[1] = swap(&lines[1], 1);
    lines[2] = swap(&lines[2], 0);
    let f = temp("corrupt.txt", &(lines.join("\n") + "\n"));
    let o = run(&["verify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a scheme: p^"), "{}", stderr(&o));

    let f = temp("asym.txt", "scheme v=3 d=2\n0 1 2\n2 0 1\n1 2 0\n");
    let o = run(&["verify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("asymmetric"));

    let o = run(&["verify", "/nonexistent/scheme.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn analyze_hamming_and_pentagon() {
    let o = run(&["analyze", "hamming-4-2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("tags: imprimitive, metric, cometric, Q-antipodal, Q-bipartite"));
    assert_eq!(s.matches("Q-antipodal: yes  Q-bipartite: yes").count(), 2);

    let o = run(&["analyze", "pentagon"]);
    let s = stdout(&o);
    assert!(s.contains("tags: primitive, metric, cometric"));
    assert!(s.contains("field: Q(sqrt 5)"));
    assert_eq!(
        run(&["analyze", "pentagon", "--field", "rational"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run(&["analyze", "pentagon", "--field", "2"]).status.code(),
        Some(4)
    );
    assert_eq!(
        run(&["analyze", "pentagon", "--field", "5"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["analyze", "pentagon", "--assert-uniform"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["analyze", "hamming-4-2", "--assert-uniform"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn analyze_linked_hosi_json() {
    let o = run(&["analyze", "linked-hosi", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], 4);
    assert!(v["metric_orderings"].as_array().unwrap().is_empty());
    let c = &v["cometric"][0];
    assert_eq!(c["krein_array"], "{21, 16, 8, 1; 1, 4, 16, 21}");
    assert_eq!(c["partition"], "150=1+30+42+70+7");
    assert_eq!(
        c["spectrum"],
        serde_json::json!(["30", "10", "0", "-5", "-15"])
    );
    assert_eq!(c["q_antipodal"], true);
    assert_eq!(
        c["profile"]["dismantled"][0]["spectral"],
        "{21, 16, 6, 1; 1, 6, 16, 21}"
    );
    let sys = v["systems"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["w"] == 3)
        .unwrap();
    assert_eq!(sys["uniform"], true);
    assert_eq!(sys["q_higman"], serde_json::json!([2, 3]));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["--threads", "1", "analyze", "linked-biplanes", "--json"]);
    let b = run(&["--threads", "4", "analyze", "linked-biplanes", "--json"]);
    let c = bin()
        .args(["analyze", "linked-biplanes", "--json"])
        .env("SCHEME_FORGE_SEED", "12345")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let a = run(&["--threads", "1", "scan", "--nmax", "300"]);
    let b = run(&["--threads", "3", "scan", "--nmax", "300"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_against_golden() {
    let o = run(&[
        "scan",
        "--nmax",
        "2000",
        "--wmax",
        "6",
        "--golden",
        &golden_path(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), std::fs::read_to_string(golden_path()).unwrap());
    let o = run(&["scan", "--nmax", "100", "--golden", &golden_path()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("MISSING srg(135,70,37,35)"));
    let o = run(&["scan", "--nmax", "50", "--wmax", "2", "--tsv"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 2);
    assert!(s
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("50\t42\t35\t36\t7\tunique\t{21, 16, 6, 1; 1, 6, 16, 21}\t2\t100"));
    assert_eq!(
        run(&["scan", "--golden", "/nonexistent"]).status.code(),
        Some(3)
    );
}

#[test]
fn dismantle_linked_hosi() {
    let dir = std::env::temp_dir().join(format!("scheme-forge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("hs.txt");
    let o = run(&[
        "dismantle",
        "linked-hosi",
        "--fibres",
        "0,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = parse_scheme(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(t.v(), 100);
    let p = verify_scheme(&t).unwrap();
    let k = krein_tensor(&eigendata(&p).unwrap()).unwrap();
    let arrays = cometric_orderings(&k, &p).unwrap().arrays;
    assert_eq!(arrays[0].to_string(), "{21, 16, 6, 1; 1, 6, 16, 21}");
    assert_eq!(
        run(&["dismantle", "linked-hosi", "--fibres", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["dismantle", "pentagon", "--fibres", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn construct_verbs() {
    let o = run(&["construct", "hemisystem-params", "5"]);
    assert!(stdout(&o).contains("{104, 88.2, 16.8, 1; 1, 16.8, 88.2, 104}"));
    assert_eq!(
        run(&["construct", "hemisystem-params", "4"]).status.code(),
        Some(1)
    );

    let o = run(&["construct", "srg-decomp", "petersen-pentagons"]);
    assert!(stdout(&o).starts_with("exceptional"));
    let o = run(&["construct", "srg-decomp", "clebsch-matchings"]);
    assert!(stdout(&o).starts_with("scheme v=16 d=4"));

    // the same split given as a file
    let clebsch = run(&["construct", "hamming", "4", "2"]);
    assert!(stdout(&clebsch).starts_with("scheme v=16 d=4"));
    let g = scheme_forge::constructions::clebsch();
    let inp = scheme_forge::constructions::clebsch_matchings();
    let table = g.to_table().unwrap();
    let fibre: Vec<String> = inp.u1.iter().map(|x| x.to_string()).collect();
    let f = temp(
        "clebsch.txt",
        &format!("{}#fibre {}\n", table.to_text(), fibre.join(",")),
    );
    let o = run(&["construct", "srg-decomp", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("scheme v=16 d=4"));

    let o = run(&["construct", "double", "pentagon"]);
    assert!(stdout(&o).starts_with("scheme v=10"));
    for (args, head) in [
        (vec!["construct", "hosi"], "scheme v=50 d=2"),
        (vec!["construct", "rectangular", "3", "2"], "scheme v=6 d=3"),
        (vec!["construct", "biplane16"], "scheme v=32 d=3"),
    ] {
        let o = run(&args);
        assert!(stdout(&o).starts_with(head), "{args:?}");
    }
}
