//! Embedding files as an external producer would write them: bytes are built
//! by hand here, independent of the crate's encoder.

use amsf::embedding::{decode_embeddings, load_embeddings, SourceKind};
use amsf::harness::{run_experiment, ExperimentConfig, StyleSource, StyleSpec};
use amsf::Error;

fn record(buf: &mut Vec<u8>, name: &str, kind: u8, rows: u32, cols: u32, values: &[f64]) {
    buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
    buf.extend_from_slice(name.as_bytes());
    buf.push(kind);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn file(records: &[(&str, u8, u32, u32, Vec<f64>)]) -> Vec<u8> {
    let mut buf = b"AMSFEMB1".to_vec();
    buf.extend_from_slice(&(records.len() as u32).to_le_bytes());
    for (name, kind, rows, cols, values) in records {
        record(&mut buf, name, *kind, *rows, *cols, values);
    }
    buf
}

/// Pseudo-random values that pass through f32, as an encoder export would.
fn widened(n: usize, salt: u32) -> Vec<f64> {
    (0..n as u32)
        .map(|i| {
            let x = ((i.wrapping_mul(2654435761).wrapping_add(salt)) % 2001) as f32 / 1000.0 - 1.0;
            f64::from(x)
        })
        .collect()
}

#[test]
fn hand_built_file_decodes() {
    let bytes = file(&[
        ("a", 0, 2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        ("é-image", 1, 1, 3, vec![-0.5, 0.0, 0.25]),
    ]);
    let recs = decode_embeddings(&bytes).unwrap();
    assert_eq!(recs[0].name, "a");
    assert_eq!(recs[0].tokens.kind(), SourceKind::Text);
    assert_eq!(recs[0].tokens.tokens().row(1), &[4.0, 5.0, 6.0]);
    assert_eq!(recs[1].name, "é-image");
    assert_eq!(recs[1].tokens.kind(), SourceKind::Image);
}

#[test]
fn widened_f32_values_are_exact() {
    let vals = widened(12, 3);
    let recs = decode_embeddings(&file(&[("t", 0, 3, 4, vals.clone())])).unwrap();
    for (a, b) in recs[0].tokens.tokens().as_slice().iter().zip(&vals) {
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(f64::from(*a as f32), *a);
    }
}

#[test]
fn declared_shape_longer_than_payload() {
    let bytes = file(&[("dog", 0, 4, 16, vec![0.5; 63])]);
    assert!(matches!(
        decode_embeddings(&bytes),
        Err(Error::CorruptRecord(_))
    ));
}

#[test]
fn exported_file_drives_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("export.amsf");
    let dim = 32;
    std::fs::write(
        &path,
        file(&[
            ("watercolor_text", 0, 5, dim, widened(5 * dim as usize, 1)),
            ("watercolor_image", 1, 7, dim, widened(7 * dim as usize, 2)),
        ]),
    )
    .unwrap();
    assert_eq!(load_embeddings(&path).unwrap().len(), 2);

    let mut cfg = ExperimentConfig::toy("dog", &[("mosaic", "mosaic style", "mosaic.png")]);
    cfg.styles.push(StyleSpec {
        name: "watercolor".into(),
        source: StyleSource::File {
            path: "export.amsf".into(),
            text_record: "watercolor_text".into(),
            image_record: "watercolor_image".into(),
        },
        scale: 1.0,
    });
    cfg.base_dir = tmp.path().to_path_buf();
    cfg.output_dir = tmp.path().join("out");
    cfg.denoise.steps = 5;
    let s = run_experiment(&cfg).unwrap();
    assert_eq!(s.mean_alignment.len(), 2);
    assert!(s.mean_alignment.iter().all(|a| a.is_finite()));
}

#[test]
fn dimension_mismatch_in_file_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("e.amsf"),
        file(&[("t", 0, 1, 4, vec![1.0; 4]), ("i", 1, 1, 4, vec![1.0; 4])]),
    )
    .unwrap();
    let mut cfg = ExperimentConfig::toy("dog", &[]);
    cfg.styles.push(StyleSpec {
        name: "x".into(),
        source: StyleSource::File {
            path: "e.amsf".into(),
            text_record: "t".into(),
            image_record: "i".into(),
        },
        scale: 1.0,
    });
    cfg.base_dir = tmp.path().to_path_buf();
    match cfg.build_inputs() {
        Err(Error::Config { field, .. }) => assert_eq!(field, "styles[0]"),
        other => panic!("{other:?}"),
    }
}
