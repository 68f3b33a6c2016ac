//! Relation names shared by every builder and formula in the crate.

/// Tree edge, parent to child.
pub const EDGE: &str = "Edge";
/// Marks the root of every tree component (and of every box tree).
pub const ROOT: &str = "Root";
/// Spine elements of a box structure.
pub const SPINE: &str = "S";
/// Splits a composite structure into its categoricity part and its coding part.
pub const PART: &str = "R";

/// Sort tag `R<n>`.
pub fn sort_tag(n: u32) -> String {
    format!("R{n}")
}

/// Stage relation `U<s>`.
pub fn stage(s: u32) -> String {
    format!("U{s}")
}

/// Box relation `T<m>`: `T<m>(a, x)` holds when `x` lies in the level-`m` box of `a`.
pub fn box_level(m: u32) -> String {
    format!("T{m}")
}

fn parse_indexed(name: &str, prefix: char) -> Option<u32> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Inverse of [`sort_tag`].
pub fn parse_sort_tag(name: &str) -> Option<u32> {
    parse_indexed(name, 'R')
}

/// Inverse of [`stage`].
pub fn parse_stage(name: &str) -> Option<u32> {
    parse_indexed(name, 'U')
}

/// Inverse of [`box_level`].
pub fn parse_box_level(name: &str) -> Option<u32> {
    parse_indexed(name, 'T')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_names_round_trip() {
        assert_eq!(parse_sort_tag(&sort_tag(5)), Some(5));
        assert_eq!(parse_stage(&stage(12)), Some(12));
        assert_eq!(parse_box_level(&box_level(3)), Some(3));
        assert_eq!(parse_sort_tag(PART), None);
        assert_eq!(parse_stage("Ux"), None);
        assert_eq!(parse_box_level("Tree"), None);
    }
}
