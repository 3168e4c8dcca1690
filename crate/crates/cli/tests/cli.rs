mod common;

use std::fs;
use std::process::Command;

use common::{dataset, mask_entry, snapshot, write_manifest, PATCH};
use specaug_cli::{
    replay, run_augment, run_eval, AuditLog, EvalOptions, Manifest, PolicyConfig,
    ReplicationFilter, AUDIT_FILE,
};
use specaug_core::{
    save_image, Draw, HoleFillMode, Image, ImageFormat, LabelGrid, Method, PatchLabel,
};

fn policy(methods: Vec<Method>, r: usize, eta: f64, filter: ReplicationFilter) -> PolicyConfig {
    PolicyConfig::new(methods, r, eta, 42, filter).unwrap()
}

#[test]
fn diseased_only_simple_replication() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = Manifest::load(dataset(&dir.path().join("in"), &[true, false, true])).unwrap();
    let out = dir.path().join("out");
    let audit = run_augment(
        &manifest,
        &policy(
            vec![Method::Simple],
            5,
            0.0,
            ReplicationFilter::DiseasedOnly,
        ),
        &out,
        2,
    )
    .unwrap();
    assert_eq!(audit.counts.outputs, 10);
    assert_eq!(audit.counts.skipped, 1);
    assert!(audit.outputs.iter().all(|o| o.image_id != "img1"));
    let images = snapshot(&out)
        .keys()
        .filter(|k| k.ends_with(".spa"))
        .count();
    assert_eq!(images, 10);
    let source = manifest.load_image(&manifest.entries[0]).unwrap();
    let copy =
        specaug_core::load_image(out.join(&audit.outputs[0].image_file), ImageFormat::Rawf64)
            .unwrap();
    assert_eq!(copy, source);
}

#[test]
fn dct_audit_records_linear_rho() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = Manifest::load(dataset(dir.path(), &[false])).unwrap();
    let out = dir.path().join("out");
    run_augment(
        &manifest,
        &policy(vec![Method::Dct], 3, 0.3, ReplicationFilter::All),
        &out,
        1,
    )
    .unwrap();
    let audit = AuditLog::load(out.join(AUDIT_FILE)).unwrap();
    let rhos: Vec<f64> = audit
        .outputs
        .iter()
        .map(|o| match o.draws[..] {
            [Draw::Spectral { rho }] => rho,
            _ => panic!("unexpected draws {:?}", o.draws),
        })
        .collect();
    assert_eq!(rhos, [0.1, 0.2, 0.3]);
    let names: Vec<_> = audit.outputs.iter().map(|o| o.image_file.clone()).collect();
    let h = &audit.policy_hash;
    assert_eq!(names, [1, 2, 3].map(|r| format!("img0__r{r}__{h}.spa")));
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let manifest =
        Manifest::load(dataset(&dir.path().join("in"), &[true, true, false, true])).unwrap();
    let p = policy(
        specaug_cli::parse_methods(
            "dwt+affine+elastic",
            &specaug_cli::MethodOptions {
                disp_range: (1.0, 3.0),
                ..specaug_cli::MethodOptions::with_window(manifest.window().unwrap())
            },
        )
        .unwrap(),
        3,
        0.05,
        ReplicationFilter::All,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    run_augment(&manifest, &p, &a, 1).unwrap();
    run_augment(&manifest, &p, &b, 1).unwrap();
    run_augment(&manifest, &p, &c, 8).unwrap();
    let (sa, sb, sc) = (snapshot(&a), snapshot(&b), snapshot(&c));
    assert_eq!(sa.len(), 4 * 3 * 2 + 1);
    assert_eq!(sa, sb);
    assert_eq!(sa, sc);
}

#[test]
fn replay_rebuilds_chained_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = Manifest::load(dataset(&dir.path().join("in"), &[true, false])).unwrap();
    let p = policy(
        specaug_cli::parse_methods(
            "dwt+affine+elastic",
            &specaug_cli::MethodOptions {
                disp_range: (1.0, 3.0),
                ..specaug_cli::MethodOptions::with_window(manifest.window().unwrap())
            },
        )
        .unwrap(),
        2,
        0.01,
        ReplicationFilter::All,
    );
    let out = dir.path().join("out");
    let audit = run_augment(&manifest, &p, &out, 1).unwrap();
    let reloaded = AuditLog::load(out.join(AUDIT_FILE)).unwrap();
    assert_eq!(reloaded, audit);
    for rec in &reloaded.outputs {
        assert_eq!(rec.draws.len(), 3);
        let sample = replay(&reloaded, &rec.image_file).unwrap();
        let img_path = dir.path().join("replayed.spa");
        let lab_path = dir.path().join("replayed.labels.csv");
        specaug_cli::augment::write_sample(&sample, &img_path, Some(&lab_path)).unwrap();
        assert_eq!(
            fs::read(&img_path).unwrap(),
            fs::read(out.join(&rec.image_file)).unwrap()
        );
        let label_file = rec.label_file.as_ref().unwrap();
        assert_eq!(
            fs::read(&lab_path).unwrap(),
            fs::read(out.join(label_file)).unwrap()
        );
    }
    assert!(replay(&reloaded, "nope.spa").is_err());
}

#[test]
fn diseased_only_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let img = Image::filled(16, 16, 3.0).unwrap();
    save_image(&img, dir.path().join("a.spa"), ImageFormat::Rawf64).unwrap();
    let path = write_manifest(
        dir.path(),
        "m.json",
        vec![specaug_cli::Entry {
            image_id: "a".into(),
            image_path: "a.spa".into(),
            label_path: None,
        }],
    );
    let manifest = Manifest::load(path).unwrap();
    let err = run_augment(
        &manifest,
        &policy(
            vec![Method::Simple],
            2,
            0.0,
            ReplicationFilter::DiseasedOnly,
        ),
        &dir.path().join("out"),
        1,
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let audit = run_augment(
        &manifest,
        &policy(vec![Method::Simple], 2, 0.0, ReplicationFilter::All),
        &dir.path().join("out"),
        1,
    )
    .unwrap();
    assert_eq!(audit.counts.outputs, 2);
    assert!(audit.outputs.iter().all(|o| o.label_file.is_none()));
}

/// Truth manifest of two 32x32 images; `img0` has one diseased patch and
/// `img1` two.
fn eval_truth(dir: &std::path::Path) -> Manifest {
    let mut entries = Vec::new();
    for (id, sick) in [("img0", vec![(1, 1)]), ("img1", vec![(1, 1), (2, 2)])] {
        let mut labels = LabelGrid::uniform((32, 32), PATCH, PatchLabel::Healthy).unwrap();
        labels.set(0, 0, PatchLabel::Outside);
        for (r, c) in sick {
            labels.set(r, c, PatchLabel::Diseased);
        }
        save_image(
            &Image::zeros(32, 32).unwrap(),
            dir.join(format!("{id}.spa")),
            ImageFormat::Rawf64,
        )
        .unwrap();
        specaug_core::save_labels(&labels, dir.join(format!("{id}.labels.csv"))).unwrap();
        entries.push(specaug_cli::Entry {
            image_id: id.into(),
            image_path: format!("{id}.spa").into(),
            label_path: Some(format!("{id}.labels.csv").into()),
        });
    }
    Manifest::load(write_manifest(dir, "truth.json", entries)).unwrap()
}

fn eval_with(
    dir: &std::path::Path,
    name: &str,
    masks: [&[(usize, usize)]; 2],
) -> specaug_cli::EvalReport {
    let truth = eval_truth(dir);
    let entries = ["img0", "img1"]
        .iter()
        .zip(masks)
        .map(|(id, patches)| mask_entry(dir, &format!("{name}_{id}"), (32, 32), patches))
        .map(|mut e| {
            e.image_id = e.image_id.rsplit('_').next().unwrap().to_string();
            e
        })
        .collect();
    let pred = Manifest::load(write_manifest(dir, &format!("{name}.json"), entries)).unwrap();
    run_eval(&pred, &truth, &EvalOptions::default()).unwrap()
}

#[test]
fn eval_examples() {
    let dir = tempfile::tempdir().unwrap();
    let perfect = eval_with(dir.path(), "perfect", [&[(1, 1)], &[(1, 1), (2, 2)]]);
    assert_eq!(perfect.aggregate_f1, 1.0);

    let empty = eval_with(dir.path(), "empty", [&[], &[]]);
    assert_eq!(empty.aggregate_f1, 0.0);

    // img1: tp = 1, fp = 1, fn = 1
    let mixed = eval_with(dir.path(), "mixed", [&[(1, 1)], &[(1, 1), (3, 0)]]);
    let f1: Vec<f64> = mixed.rows.iter().map(|r| r.f1).collect();
    assert_eq!(f1, [1.0, 0.5]);
    assert_eq!(mixed.aggregate_f1, 0.75);

    let csv = String::from_utf8(mixed.to_csv().unwrap()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "image_id,tp,fp,fn,tn,f1");
    assert_eq!(lines[2], "img1,1,1,1,12,0.5");
    assert_eq!(lines[3], "aggregate,2,1,1,26,0.75");
}

#[test]
fn eval_hole_fill_and_id_checks() {
    let dir = tempfile::tempdir().unwrap();
    let truth = eval_truth(dir.path());
    // diseased patch predicted with a sparse grid of holes: below the vote
    // threshold as is, fully set after closing
    let sieve = |id: &str| {
        let img = Image::from_fn(32, 32, |r, c| {
            let inside = (8..16).contains(&r) && (8..16).contains(&c);
            (inside && (r % 2 == 0 || c % 2 == 0)) as u8 as f64
        })
        .unwrap();
        save_image(
            &img,
            dir.path().join(format!("{id}.sieve.spa")),
            ImageFormat::Rawf64,
        )
        .unwrap();
        specaug_cli::Entry {
            image_id: id.into(),
            image_path: format!("{id}.sieve.spa").into(),
            label_path: None,
        }
    };
    let pred = Manifest::load(write_manifest(
        dir.path(),
        "sieve.json",
        vec![sieve("img0"), sieve("img1")],
    ))
    .unwrap();
    let strict = EvalOptions {
        patch_threshold: 0.9,
        ..EvalOptions::default()
    };
    let raw = run_eval(&pred, &truth, &strict).unwrap();
    assert_eq!(raw.rows[0].tp, 0);
    let filled = run_eval(
        &pred,
        &truth,
        &EvalOptions {
            hole_fill: Some(HoleFillMode::Closing),
            ..strict
        },
    )
    .unwrap();
    assert_eq!(filled.rows[0].tp, 1);
    assert_eq!(filled.rows[0].f1, 1.0);

    let one = Manifest::load(write_manifest(dir.path(), "one.json", vec![sieve("img0")])).unwrap();
    assert!(run_eval(&one, &truth, &EvalOptions::default()).is_err());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specaug"))
}

#[test]
fn binary_end_to_end_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dataset(&dir.path().join("in"), &[true, false]);
    let out = dir.path().join("out");
    let status = bin()
        .args([
            "augment",
            "--method",
            "dct",
            "--replications",
            "3",
            "--eta",
            "0.3",
            "--seed",
            "5",
        ])
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let audit = AuditLog::load(out.join(AUDIT_FILE)).unwrap();
    assert_eq!(audit.counts.outputs, 6);

    let target = dir.path().join("again.spa");
    let status = bin()
        .args(["replay", "--output", &audit.outputs[4].image_file])
        .arg("--audit")
        .arg(out.join(AUDIT_FILE))
        .arg("--to")
        .arg(&target)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read(&target).unwrap(),
        fs::read(out.join(&audit.outputs[4].image_file)).unwrap()
    );

    let inspect = bin()
        .arg("inspect")
        .arg(dir.path().join("in/img0.spa"))
        .output()
        .unwrap();
    assert!(inspect.status.success());
    assert!(String::from_utf8_lossy(&inspect.stdout).contains("round-trip"));

    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    let m = manifest.to_str().unwrap();
    let o = out.to_str().unwrap();
    assert_eq!(
        code(&[
            "augment",
            "--manifest",
            "/no/such/manifest.json",
            "--out",
            o
        ]),
        Some(2)
    );
    assert_eq!(
        code(&["augment", "--manifest", m, "--out", o, "--method", "blur"]),
        Some(1)
    );
    assert_eq!(
        code(&["augment", "--manifest", m, "--out", o, "--eta", "2"]),
        Some(1)
    );
    assert_eq!(
        code(&["augment", "--manifest", m, "--out", o, "--grid", "4by4"]),
        Some(1)
    );
    assert_eq!(code(&["augment", "--bogus"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
}
