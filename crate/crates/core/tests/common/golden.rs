//! CLI invocations on the tutorial model with their golden output files.
//! `MODEL` is replaced by the model path.

pub fn commands() -> Vec<(&'static str, Vec<&'static str>)> {
    let m = |cmd: &[&'static str], rest: &[&'static str]| {
        let mut v = cmd.to_vec();
        v.extend_from_slice(&["-f", "MODEL"]);
        v.extend_from_slice(rest);
        v
    };
    vec![
        (
            "solve_commute.txt",
            m(&["solve"], &["--algebra", "Null2", "--system", "Commute"]),
        ),
        (
            "radical_corner.txt",
            m(&["radical"], &["--algebra", "Z2", "--points", "Corner"]),
        ),
        (
            "closure_one.txt",
            m(&["closure"], &["--algebra", "Z2", "--points", "One"]),
        ),
        (
            "coord_diagonal.txt",
            m(&["coord"], &["--algebra", "Z2", "--system", "Diagonal"]),
        ),
        (
            "free_z2_2.txt",
            m(&["free"], &["--algebra", "Z2", "--vars", "2"]),
        ),
        (
            "decompose_corner.txt",
            m(
                &["decompose"],
                &["--algebra", "Null2", "--points", "Corner"],
            ),
        ),
        (
            "topology_z2_1.txt",
            m(&["topology"], &["--algebra", "Z2", "--vars", "1"]),
        ),
        (
            "konig_null2_2.txt",
            m(&["konig-trace"], &["--algebra", "Null2", "--vars", "2"]),
        ),
        (
            "artinian_z2_2.txt",
            m(&["check", "artinian"], &["--algebra", "Z2", "--vars", "2"]),
        ),
        (
            "noetherian_null2_1.txt",
            m(
                &["check", "noetherian"],
                &["--algebra", "Null2", "--vars", "1"],
            ),
        ),
        (
            "product_z2_3.txt",
            m(
                &["product"],
                &["--algebra", "Z2", "--index", "3", "--principal-on", "0,2"],
            ),
        ),
        (
            "ultrapower_z2.txt",
            m(
                &["verify", "ultrapower"],
                &["--algebra", "Z2", "--index", "2"],
            ),
        ),
        (
            "preservation_null2.txt",
            m(&["verify", "preservation"], &["--algebra", "Null2"]),
        ),
        (
            "topology_null2_json.txt",
            m(
                &["topology"],
                &["--algebra", "Null2", "--json", "--vars", "2"],
            ),
        ),
        (
            "artinian_null2_json.txt",
            m(
                &["check", "artinian"],
                &["--algebra", "Null2", "--json", "--vars", "1"],
            ),
        ),
    ]
}
