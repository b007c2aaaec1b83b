mod common;

#[test]
fn golden_transcript_has_no_boundary_diffs() {
    let golden = common::golden_segmentation();
    assert!(golden.expected.len() >= 200, "corpus has {} sentences", golden.expected.len());
    let diffs = golden.boundary_diffs();
    assert!(diffs.is_empty(), "{} boundary diffs:\n{}", diffs.len(), diffs.join("\n"));
}
