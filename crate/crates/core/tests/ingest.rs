mod common;

use std::path::Path;

use common::fixture;
use geokit::ingest::{
    decode_png, load_diagram, load_manifest, load_problems, load_problems_lenient, load_tensor, parse_jsonl, read_geot, read_json_tensor, save_diagram,
    save_tensor, write_geot, write_json_tensor, write_jsonl, IngestError, ProblemRecord, Tensor, TensorError,
};
use geokit::metrics::BinaryDiagram;
use geokit::prompting::{build_mix, SpecialTokens, TokenSequence};
use geokit::rewards::AnswerKind;
use proptest::prelude::*;

fn write_png(path: &Path, w: u32, h: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) {
    let file = std::fs::File::create(path).unwrap();
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), w, h);
    enc.set_color(color);
    enc.set_depth(depth);
    enc.write_header().unwrap().write_image_data(data).unwrap();
}

#[test]
fn two_line_problem_file() {
    let recs = load_problems(&fixture("problems/good.jsonl")).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].problem_text_cn, "求AB。");
    assert_eq!(recs[1].conscdl, "Shape(AB)\nCollinear(ABC)");
    assert_eq!(recs[1].line, 2);
    assert_eq!(recs[0].answer_kind(), AnswerKind::Open);
}

#[test]
fn bad_cdl_names_line_and_statement() {
    match load_problems(&fixture("problems/bad_line3.jsonl")) {
        Err(IngestError::Cdl { line, field, statement, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(field, "conscdl");
            assert!(statement.contains("Collinear(ABC") || statement.contains("Shape(CD)"), "{statement}");
        }
        other => panic!("{other:?}"),
    }
    let err = load_problems(&fixture("problems/bad_line3.jsonl")).unwrap_err().to_string();
    assert!(err.starts_with("line 3:"), "{err}");
    assert_eq!(load_problems_lenient(&fixture("problems/bad_line3.jsonl")).unwrap().len(), 3);
}

#[test]
fn empty_and_duplicate_files() {
    assert!(load_problems(&fixture("problems/empty.jsonl")).unwrap().is_empty());
    assert!(matches!(
        load_problems(&fixture("problems/duplicate.jsonl")),
        Err(IngestError::DuplicateId { line: 2, .. })
    ));
    assert!(matches!(load_problems(Path::new("/no/such/file.jsonl")), Err(IngestError::Io { .. })));
}

#[test]
fn problem_round_trip_through_jsonl() {
    let recs = load_problems(&fixture("problems/good.jsonl")).unwrap();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &recs).unwrap();
    let back: Vec<(usize, ProblemRecord)> = parse_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap();
    let back: Vec<ProblemRecord> = back.into_iter().map(|(_, r)| r).collect();
    let strip = |v: &[ProblemRecord]| v.iter().map(|r| ProblemRecord { line: 0, ..r.clone() }).collect::<Vec<_>>();
    assert_eq!(strip(&back), strip(&recs));
}

#[test]
fn manifest_resolves_relative_paths() {
    let entries = load_manifest(&fixture("gpms/manifest.jsonl")).unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries.iter().all(|e| e.gold.is_file() && e.rec.is_file()));
}

#[test]
fn white_png_has_no_black_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("white.png");
    write_png(&p, 512, 512, png::ColorType::Grayscale, png::BitDepth::Eight, &vec![255; 512 * 512]);
    let d = load_diagram(&p, 128).unwrap();
    assert_eq!((d.width(), d.height(), d.black_count()), (512, 512, 0));
}

#[test]
fn one_bit_png_zero_bits_are_black() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bits.png");
    // 8x2, rows 0b1010_1010 and 0b1111_0000; a 0 bit is black ink.
    write_png(&p, 8, 2, png::ColorType::Grayscale, png::BitDepth::One, &[0b1010_1010, 0b1111_0000]);
    let d = load_diagram(&p, 128).unwrap();
    let black: Vec<(usize, usize)> = d.black_pixels().collect();
    let expected: Vec<(usize, usize)> = [(1, 0), (3, 0), (5, 0), (7, 0), (4, 1), (5, 1), (6, 1), (7, 1)].into();
    let mut sorted = black.clone();
    sorted.sort_by_key(|&(x, y)| (y, x));
    assert_eq!(sorted, expected);
}

#[test]
fn pure_red_pixel_is_black_at_128() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("red.png");
    let mut data = vec![255u8; 2 * 2 * 3];
    data[..3].copy_from_slice(&[255, 0, 0]);
    write_png(&p, 2, 2, png::ColorType::Rgb, png::BitDepth::Eight, &data);
    let d = load_diagram(&p, 128).unwrap();
    assert!(d.is_black(0, 0));
    assert_eq!(d.black_count(), 1);
    // luminance 76: still black at 77, white at 76
    assert!(load_diagram(&p, 77).unwrap().is_black(0, 0));
    assert!(!load_diagram(&p, 76).unwrap().is_black(0, 0));
}

#[test]
fn transparent_pixels_are_white() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("alpha.png");
    write_png(&p, 2, 1, png::ColorType::Rgba, png::BitDepth::Eight, &[0, 0, 0, 255, 0, 0, 0, 0]);
    let d = load_diagram(&p, 128).unwrap();
    assert!(d.is_black(0, 0) && !d.is_black(1, 0));
}

#[test]
fn sixteen_bit_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("deep.png");
    write_png(&p, 1, 1, png::ColorType::Grayscale, png::BitDepth::Sixteen, &[0, 0]);
    assert!(matches!(load_diagram(&p, 128), Err(IngestError::UnsupportedBitDepth { depth: 16, .. })));
}

#[test]
fn diagram_save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.png");
    let d = BinaryDiagram::from_points(5, 3, [(0, 0), (4, 2), (2, 1)]).unwrap();
    save_diagram(&p, &d).unwrap();
    assert_eq!(load_diagram(&p, 128).unwrap(), d);
}

#[test]
fn tensor_file_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tensor::new(vec![1, 2, 2], vec![0.5, -0.25, 3.0, 0.0]).unwrap();
    for name in ["t.geot", "t.json"] {
        let p = dir.path().join(name);
        save_tensor(&p, &t).unwrap();
        assert_eq!(load_tensor(&p).unwrap(), t, "{name}");
    }
    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, b"\x00\x01\x02\x03rest").unwrap();
    assert!(matches!(
        load_tensor(&junk),
        Err(IngestError::Tensor { source: TensorError::BadMagic(_), .. })
    ));
}

#[test]
fn truncated_geot_fixture() {
    let bytes = std::fs::read(fixture("lfq/grid_b2.geot")).unwrap();
    let err = read_geot(&bytes[..bytes.len() - 5]).unwrap_err();
    assert_eq!(err, TensorError::Truncated { expected: 60, actual: 55 });
}

fn f32_tensor() -> impl Strategy<Value = Tensor> {
    prop::collection::vec(1usize..5, 1..4).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), n)
            .prop_map(move |data| Tensor::new(shape.clone(), data.into_iter().map(f64::from).collect()).unwrap())
    })
}

fn f64_tensor() -> impl Strategy<Value = Tensor> {
    prop::collection::vec(1usize..5, 1..4).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(-1e300f64..1e300, n).prop_map(move |data| Tensor::new(shape.clone(), data).unwrap())
    })
}

fn same_bits(a: &Tensor, b: &Tensor) -> bool {
    a.shape == b.shape && a.data.len() == b.data.len() && a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    #[test]
    fn geot_round_trip_is_identity(t in f32_tensor()) {
        let bytes = write_geot(&t).unwrap();
        let back = read_geot(&bytes).unwrap();
        prop_assert!(same_bits(&back, &t));
        prop_assert_eq!(write_geot(&back).unwrap(), bytes);
    }

    #[test]
    fn json_round_trip_is_identity(t in f64_tensor()) {
        let back = read_json_tensor(&write_json_tensor(&t)).unwrap();
        prop_assert!(same_bits(&back, &t));
    }

    #[test]
    fn geot_reader_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..80)) {
        let _ = read_geot(&bytes);
        let mut with_magic = b"GEOT".to_vec();
        with_magic.extend_from_slice(&bytes);
        let _ = read_geot(&with_magic);
    }

    #[test]
    fn json_tensor_reader_never_panics(text in "[\\[\\]0-9.,eE+\\- \"a]{0,40}") {
        let _ = read_json_tensor(&text);
    }

    #[test]
    fn png_decoder_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let mut data = b"\x89PNG\r\n\x1a\n".to_vec();
        data.extend_from_slice(&bytes);
        let _ = decode_png(&data, Path::new("fuzz.png"));
    }

    #[test]
    fn jsonl_reader_never_panics(text in "[{}\\[\\]\":,a-z0-9 \n]{0,80}") {
        let _ = parse_jsonl::<ProblemRecord>(&text);
    }

    #[test]
    fn sequence_jsonl_round_trip(
        knowledge in prop::collection::vec(0u32..1000, 0..6),
        diagram in prop::collection::vec(0u32..1000, 1..6),
        response in prop::collection::vec(0u32..1000, 1..6),
    ) {
        let seq = build_mix(&knowledge, &diagram, &response, &SpecialTokens::reserved_after(1000)).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, [&seq]).unwrap();
        let back: Vec<(usize, TokenSequence)> = parse_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(&back[0].1, &seq);
    }
}
