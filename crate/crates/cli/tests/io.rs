use sketchy_cli::io::*;
use sketchy_core::matcore::gaussian_map;
use sketchy_core::{DenseMatrix, RandomStream};

fn sample() -> DenseMatrix {
    let mut a = gaussian_map(7, 5, RandomStream::new(1, 0)).unwrap();
    a.set(0, 0, 1e-300);
    a.set(1, 1, -1.2345678901234567e300);
    a.set(2, 2, 0.1 + 0.2);
    a
}

#[test]
fn binary_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.skcm");
    let a = sample();
    save_matrix(&path, &a, None).unwrap();
    let b = load_matrix(&path, None).unwrap();
    assert_eq!(a.shape(), b.shape());
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    assert_eq!(std::fs::read(&path).unwrap(), encode_binary(&a));
}

#[test]
fn text_formats_round_trip_exactly() {
    let a = sample();
    for format in [Format::Csv, Format::MatrixMarket] {
        let back = decode(&encode(&a, format), format).unwrap();
        assert_eq!(back, a, "{format:?}");
    }
    // 17 significant digits always suffice for an exact round trip.
    let text = a.as_slice().iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>();
    let rows: Vec<String> = text.chunks(5).map(|r| r.join(",")).collect();
    assert_eq!(decode_csv(&rows.join("\n")).unwrap(), a);
}

#[test]
fn small_csv_example() {
    let a = decode_csv("1,2\n3,4").unwrap();
    assert_eq!(a, DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap());
    let spaced = decode_csv(" 1 , 2\n\n3,4\n").unwrap();
    assert_eq!(spaced, a);
}

#[test]
fn truncated_payload_names_byte_counts() {
    let bytes = encode_binary(&sample());
    let err = decode_binary(&bytes[..bytes.len() - 3]).unwrap_err();
    assert!(err.message.contains("needs 280 bytes") && err.message.contains("found 277"), "{err}");
    assert_eq!(err.location, Location::Byte(24 + 277));

    let err = decode_binary(&bytes[..10]).unwrap_err();
    assert!(err.message.contains("header truncated"), "{err}");
}

#[test]
fn bad_magic_and_version_are_located() {
    let mut bytes = encode_binary(&sample());
    bytes[0] = b'X';
    let err = decode_binary(&bytes).unwrap_err();
    assert_eq!(err.location, Location::Byte(0));
    assert!(err.message.contains("bad magic"));

    let mut bytes = encode_binary(&sample());
    bytes[4] = 2;
    let err = decode_binary(&bytes).unwrap_err();
    assert_eq!(err.location, Location::Byte(4));
    assert!(err.message.contains("version 2"));

    let mut bytes = encode_binary(&sample());
    bytes.push(0);
    assert!(decode_binary(&bytes).unwrap_err().message.contains("trailing"));
}

#[test]
fn malformed_text_is_located() {
    let err = decode_csv("1,2\n3,abc\n").unwrap_err();
    assert_eq!(err.location, Location::Line { line: 2, column: Some(2) });
    assert!(err.message.contains("'abc'"));

    let err = decode_csv("1,2\n3\n").unwrap_err();
    assert_eq!(err.location, Location::Line { line: 2, column: None });

    assert!(decode_csv("1,inf\n").is_err());
    assert_eq!(decode_csv("").unwrap_err().location, Location::File);

    let mm = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
    let err = decode_matrix_market(mm).unwrap_err();
    assert_eq!(err.location, Location::Line { line: 4, column: Some(1) });

    let mm = "%%MatrixMarket matrix array real general\n2 2\n1\n2\nthree\n4\n";
    let err = decode_matrix_market(mm).unwrap_err();
    assert_eq!(err.location, Location::Line { line: 5, column: Some(1) });

    let mm = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
    assert!(decode_matrix_market(mm).unwrap_err().message.contains("expected 4 values, found 3"));
}

#[test]
fn matrix_market_layouts() {
    let array = "%%MatrixMarket matrix array real general\n% column major\n2 3\n1\n4\n2\n5\n3\n6\n";
    let want = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
    assert_eq!(decode_matrix_market(array).unwrap(), want);

    let coord = "%%MatrixMarket matrix coordinate integer general\n2 3 3\n1 1 1\n2 3 6\n1 2 2\n";
    let want = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, 0.0, 6.0]]).unwrap();
    assert_eq!(decode_matrix_market(coord).unwrap(), want);

    let pattern = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n";
    assert_eq!(decode_matrix_market(pattern).unwrap().get(1, 0), 1.0);
}

#[test]
fn load_reports_path_and_sniffs_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("matrix.dat");
    std::fs::write(&path, encode_binary(&sample())).unwrap();
    assert_eq!(load_matrix(&path, None).unwrap(), sample());

    std::fs::write(&path, "1,2\n3,?\n").unwrap();
    let err = load_matrix(&path, None).unwrap_err().to_string();
    assert!(err.contains("matrix.dat") && err.contains("line 2, field 2"), "{err}");

    let missing = dir.path().join("missing.csv");
    assert!(matches!(load_matrix(&missing, None), Err(IoError::Os { .. })));
}
