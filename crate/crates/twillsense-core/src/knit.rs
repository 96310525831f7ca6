//! Weft-knit stitch programs for Twill-based sensor patches.
//!
//! A [`KnitProgram`] is an explicit per-course, per-needle instruction grid.
//! [`build_twill`] produces the plain Twill pattern (alternating knit and
//! float stitches, phase-shifted every other course); [`build_variant`]
//! produces a complete two-face sensor patch for one of the ten cataloged
//! variants, with a resistive back face, a substrate front face and
//! conductive connector courses bounding the sensor field.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Needle bed of a two-bed flat knitting machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bed {
    Front,
    Back,
}

/// Stitch operation performed by a needle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StitchKind {
    /// Forms a new loop by pulling the yarn through the held loop.
    Knit,
    /// Adds the yarn to the currently held loop without forming a new one.
    Tuck,
    /// Yarn bypasses the needle entirely (aka "miss").
    Float,
}

/// One needle action: what is done and on which bed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StitchOp {
    pub kind: StitchKind,
    pub bed: Bed,
}

impl StitchOp {
    pub const fn new(kind: StitchKind, bed: Bed) -> Self {
        StitchOp { kind, bed }
    }
}

/// Electrical/mechanical role of a yarn in the patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YarnRole {
    /// Non-functional base material (PES).
    Substrate,
    /// High-linear-resistance sensing yarn.
    Sensor,
    /// Low-resistance yarn for connector traces.
    Connector,
    /// Elastic recoil additive (Lycra), plated along the substrate.
    Elastic,
}

/// A yarn with its electrical properties.
///
/// `linear_resistance` is Ω/m; `None` marks an insulating yarn. The default
/// sensor/connector pair keeps a resistance ratio of at least 10³ so the
/// connector traces stay electrically insignificant against the sensor area.
#[derive(Debug, Clone, PartialEq)]
pub struct YarnSpec {
    pub name: String,
    pub role: YarnRole,
    pub linear_resistance: Option<f64>,
    pub ply: u32,
}

impl YarnSpec {
    /// Default resistive sensing yarn (carbon-sheath polyester, ~2.5 MΩ/m).
    pub fn default_sensor() -> Self {
        YarnSpec {
            name: String::from("Resistat"),
            role: YarnRole::Sensor,
            linear_resistance: Some(2.5e6),
            ply: 2,
        }
    }

    /// Default conductive trace yarn (silver-coated PA, well under 300 Ω/m).
    pub fn default_connector() -> Self {
        YarnSpec {
            name: String::from("HC40"),
            role: YarnRole::Connector,
            linear_resistance: Some(250.0),
            ply: 2,
        }
    }

    /// Default insulating substrate yarn.
    pub fn default_substrate(ply: u32) -> Self {
        YarnSpec {
            name: String::from("PES"),
            role: YarnRole::Substrate,
            linear_resistance: None,
            ply,
        }
    }

    /// Default elastic additive yarn.
    pub fn default_elastic(ply: u32) -> Self {
        YarnSpec {
            name: String::from("Lycra"),
            role: YarnRole::Elastic,
            linear_resistance: None,
            ply,
        }
    }

    pub fn is_conductive(&self) -> bool {
        self.linear_resistance.is_some()
    }
}

/// One needle action inside a course.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub needle: u32,
    pub op: StitchOp,
}

/// One machine pass of a single yarn across the needle bed.
#[derive(Debug, Clone, PartialEq)]
pub struct Course {
    /// Index into [`KnitProgram::yarns`].
    pub yarn: usize,
    /// Actions ordered by strictly increasing needle index.
    pub actions: Vec<Action>,
}

/// Errors from program construction and validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnitError {
    #[error("width and height must be at least 1")]
    InvalidDimension,
    #[error("sensor area must span at least 2 wales and 2 courses")]
    SensorTooSmall,
    #[error("unknown sensor variant `{0}`")]
    UnknownVariant(String),
    #[error("course {course}: needle index {needle} out of range (width {width})")]
    NeedleOutOfRange { course: usize, needle: u32, width: u32 },
    #[error("course {course}: needle indices must be strictly increasing")]
    UnorderedNeedles { course: usize },
    #[error("course {course}: yarn index {yarn} not in the yarn list")]
    BadYarnIndex { course: usize, yarn: usize },
}

/// Inter-face attachment structure of a sensor patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Faces joined only at the outermost wales ("T").
    Tubular,
    /// Resistive yarn tucked to the front-face substrate ("P←R").
    RTuckedToP,
    /// Substrate tucked to the back-face resistive yarn ("P→R").
    PTuckedToR,
}

/// Names of the ten manufactured sensor variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantName {
    PTl,
    PTm,
    PTh,
    PRp,
    PPr,
    Pl1M,
    Pl1H,
    Pl1Ml,
    Pl2MPlus,
    Pl2Hl,
}

impl VariantName {
    pub const ALL: [VariantName; 10] = [
        VariantName::PTl,
        VariantName::PTm,
        VariantName::PTh,
        VariantName::PRp,
        VariantName::PPr,
        VariantName::Pl1M,
        VariantName::Pl1H,
        VariantName::Pl1Ml,
        VariantName::Pl2MPlus,
        VariantName::Pl2Hl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantName::PTl => "P_Tl",
            VariantName::PTm => "P_Tm",
            VariantName::PTh => "P_Th",
            VariantName::PRp => "P_RP",
            VariantName::PPr => "P_PR",
            VariantName::Pl1M => "PL1_m",
            VariantName::Pl1H => "PL1_h",
            VariantName::Pl1Ml => "PL1_ml",
            VariantName::Pl2MPlus => "PL2_m+",
            VariantName::Pl2Hl => "PL2_hl",
        }
    }
}

impl fmt::Display for VariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for VariantName {
    type Err = KnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantName::ALL
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| KnitError::UnknownVariant(String::from(s)))
    }
}

/// Catalog entry for one sensor variant: structure type, substrate
/// composition and nominal stitch lengths (NP; lower numbers mean tighter
/// knits). NP values are carried as opaque metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorVariant {
    pub name: VariantName,
    pub structure: Structure,
    pub pes_threads: u32,
    pub lycra_threads: u32,
    pub np_pes: f64,
    pub np_res: f64,
    pub np_tuck: Option<f64>,
}

/// Returns all ten cataloged sensor variants.
pub fn variant_catalog() -> Vec<SensorVariant> {
    use Structure::*;
    use VariantName::*;
    let row = |name, structure, pes, lycra, np_pes, np_res, np_tuck| SensorVariant {
        name,
        structure,
        pes_threads: pes,
        lycra_threads: lycra,
        np_pes,
        np_res,
        np_tuck,
    };
    alloc::vec![
        row(PTl, Tubular, 6, 0, 13.1, 13.5, None),
        row(PTm, Tubular, 6, 0, 13.1, 12.5, None),
        row(PTh, Tubular, 6, 0, 13.1, 11.5, None),
        row(PRp, RTuckedToP, 6, 0, 13.1, 12.0, Some(9.0)),
        row(PPr, PTuckedToR, 6, 0, 13.1, 12.0, Some(9.0)),
        row(Pl1M, PTuckedToR, 5, 1, 12.5, 12.5, Some(9.0)),
        row(Pl1H, PTuckedToR, 5, 1, 12.5, 11.5, Some(9.0)),
        row(Pl1Ml, PTuckedToR, 5, 1, 12.5, 12.5, Some(9.5)),
        row(Pl2MPlus, PTuckedToR, 4, 2, 12.0, 11.8, Some(9.0)),
        row(Pl2Hl, PTuckedToR, 4, 2, 12.0, 11.5, Some(9.5)),
    ]
}

/// Looks up one variant by name.
pub fn variant(name: VariantName) -> SensorVariant {
    variant_catalog()
        .into_iter()
        .find(|v| v.name == name)
        .expect("catalog covers all names")
}

/// A complete stitch program: yarns, courses and needle width.
#[derive(Debug, Clone, PartialEq)]
pub struct KnitProgram {
    pub width: u32,
    pub yarns: Vec<YarnSpec>,
    pub courses: Vec<Course>,
    pub variant_tag: Option<VariantName>,
}

impl KnitProgram {
    /// Checks the structural invariants: valid yarn indices, needle indices
    /// inside the width and strictly increasing within each course.
    pub fn validate(&self) -> Result<(), KnitError> {
        for (ci, course) in self.courses.iter().enumerate() {
            if course.yarn >= self.yarns.len() {
                return Err(KnitError::BadYarnIndex { course: ci, yarn: course.yarn });
            }
            let mut prev: Option<u32> = None;
            for action in &course.actions {
                if action.needle >= self.width {
                    return Err(KnitError::NeedleOutOfRange {
                        course: ci,
                        needle: action.needle,
                        width: self.width,
                    });
                }
                if let Some(p) = prev {
                    if action.needle <= p {
                        return Err(KnitError::UnorderedNeedles { course: ci });
                    }
                }
                prev = Some(action.needle);
            }
        }
        Ok(())
    }

    /// Indices of the connector-yarn courses, in program order.
    pub fn connector_courses(&self) -> Vec<usize> {
        self.courses
            .iter()
            .enumerate()
            .filter(|(_, c)| self.yarns[c.yarn].role == YarnRole::Connector)
            .map(|(i, _)| i)
            .collect()
    }

    /// Renders the program as a plain-text grid, one line per course.
    ///
    /// Each line is `<yarn name>: ` followed by one character per needle:
    /// `k` front knit, `K` back knit, `t` front tuck, `T` back tuck,
    /// `.` float, space for a needle without an action.
    pub fn grid_string(&self) -> String {
        let mut out = String::new();
        let name_w = self.yarns.iter().map(|y| y.name.len()).max().unwrap_or(0);
        for course in &self.courses {
            let name = &self.yarns[course.yarn].name;
            out.push_str(name);
            for _ in name.len()..name_w {
                out.push(' ');
            }
            out.push_str(": ");
            let mut row = alloc::vec![' '; self.width as usize];
            for action in &course.actions {
                row[action.needle as usize] = match (action.op.kind, action.op.bed) {
                    (StitchKind::Knit, Bed::Front) => 'k',
                    (StitchKind::Knit, Bed::Back) => 'K',
                    (StitchKind::Tuck, Bed::Front) => 't',
                    (StitchKind::Tuck, Bed::Back) => 'T',
                    (StitchKind::Float, _) => '.',
                };
            }
            out.extend(row);
            out.push('\n');
        }
        out
    }
}

/// Whether a Twill course with the given phase knits this needle.
#[inline]
fn twill_knits(needle: u32, phase: u32) -> bool {
    (needle + phase).is_multiple_of(2)
}

/// Builds a plain Twill: courses of alternating knit and float stitches,
/// shifted by one needle for every other course, all on the front bed.
pub fn build_twill(width: u32, height: u32, yarn: YarnSpec) -> Result<KnitProgram, KnitError> {
    if width == 0 || height == 0 {
        return Err(KnitError::InvalidDimension);
    }
    let mut courses = Vec::with_capacity(height as usize);
    for c in 0..height {
        courses.push(twill_course(width, c % 2, 0, Bed::Front));
    }
    let program = KnitProgram { width, yarns: alloc::vec![yarn], courses, variant_tag: None };
    program.validate()?;
    Ok(program)
}

fn twill_course(width: u32, phase: u32, yarn: usize, bed: Bed) -> Course {
    let actions = (0..width)
        .map(|n| Action {
            needle: n,
            op: StitchOp::new(
                if twill_knits(n, phase) { StitchKind::Knit } else { StitchKind::Float },
                bed,
            ),
        })
        .collect();
    Course { yarn, actions }
}

fn full_course(width: u32, yarn: usize, bed: Bed) -> Course {
    let actions = (0..width)
        .map(|n| Action { needle: n, op: StitchOp::new(StitchKind::Knit, bed) })
        .collect();
    Course { yarn, actions }
}

/// Builds the complete stitch program for a sensor variant.
///
/// Layout: one connector course below and one above the sensor field (knit
/// on the back bed across the full width — trace routing beyond the field
/// is reduced to the two terminal labels), a back-bed Twill of sensor yarn,
/// a front-bed Twill of substrate yarn, and inter-face attachments per the
/// variant structure:
///
/// * `Tubular` — sensor yarn tucks to the front bed at outermost wales only,
/// * `RTuckedToP` — each sensor course tucks to the front bed at its first
///   float position,
/// * `PTuckedToR` — each substrate course tucks to the back bed at its first
///   float position.
pub fn build_variant(
    variant: &SensorVariant,
    sensor_wales: u32,
    sensor_courses: u32,
) -> Result<KnitProgram, KnitError> {
    if sensor_wales < 2 || sensor_courses < 2 {
        return Err(KnitError::SensorTooSmall);
    }
    let width = sensor_wales;
    let mut yarns = alloc::vec![
        YarnSpec::default_substrate(variant.pes_threads),
        YarnSpec::default_sensor(),
        YarnSpec::default_connector(),
    ];
    if variant.lycra_threads > 0 {
        yarns.push(YarnSpec::default_elastic(variant.lycra_threads));
    }
    const SUBSTRATE: usize = 0;
    const SENSOR: usize = 1;
    const CONNECTOR: usize = 2;

    let mut courses = Vec::new();
    courses.push(full_course(width, CONNECTOR, Bed::Back));

    for r in 0..sensor_courses {
        let phase = r % 2;

        let mut substrate = twill_course(width, phase, SUBSTRATE, Bed::Front);
        if variant.structure == Structure::PTuckedToR {
            tuck_first_float(&mut substrate, Bed::Back);
        }
        courses.push(substrate);

        let mut sensor = twill_course(width, phase, SENSOR, Bed::Back);
        match variant.structure {
            Structure::Tubular => {
                // join the faces at the outer wales wherever the course floats there
                for action in sensor.actions.iter_mut() {
                    let outer = action.needle == 0 || action.needle == width - 1;
                    if outer && action.op.kind == StitchKind::Float {
                        action.op = StitchOp::new(StitchKind::Tuck, Bed::Front);
                    }
                }
            }
            Structure::RTuckedToP => tuck_first_float(&mut sensor, Bed::Front),
            Structure::PTuckedToR => {}
        }
        courses.push(sensor);
    }

    courses.push(full_course(width, CONNECTOR, Bed::Back));

    let program = KnitProgram { width, yarns, courses, variant_tag: Some(variant.name) };
    program.validate()?;
    Ok(program)
}

fn tuck_first_float(course: &mut Course, bed: Bed) {
    if let Some(action) =
        course.actions.iter_mut().find(|a| a.op.kind == StitchKind::Float)
    {
        action.op = StitchOp::new(StitchKind::Tuck, bed);
    }
}

/// Builds a full-knit calibration grid: every needle knit in every sensor
/// course (back bed, sensor yarn) with connector courses above and below.
/// Used for scaling studies where the loop lattice must be homogeneous.
pub fn build_grid(wales: u32, courses: u32) -> Result<KnitProgram, KnitError> {
    if wales < 1 || courses < 1 {
        return Err(KnitError::InvalidDimension);
    }
    let yarns = alloc::vec![YarnSpec::default_sensor(), YarnSpec::default_connector()];
    let mut list = Vec::with_capacity(courses as usize + 2);
    list.push(full_course(wales, 1, Bed::Back));
    for _ in 0..courses {
        list.push(full_course(wales, 0, Bed::Back));
    }
    list.push(full_course(wales, 1, Bed::Back));
    let program = KnitProgram { width: wales, yarns, courses: list, variant_tag: None };
    program.validate()?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knit_needles(course: &Course) -> Vec<u32> {
        course
            .actions
            .iter()
            .filter(|a| a.op.kind == StitchKind::Knit)
            .map(|a| a.needle)
            .collect()
    }

    #[test]
    fn twill_4x2_alternates_and_shifts() {
        let p = build_twill(4, 2, YarnSpec::default_sensor()).unwrap();
        assert_eq!(knit_needles(&p.courses[0]), vec![0, 2]);
        assert_eq!(knit_needles(&p.courses[1]), vec![1, 3]);
        let floats0: Vec<u32> = p.courses[0]
            .actions
            .iter()
            .filter(|a| a.op.kind == StitchKind::Float)
            .map(|a| a.needle)
            .collect();
        assert_eq!(floats0, vec![1, 3]);
    }

    #[test]
    fn twill_1x1_single_knit() {
        let p = build_twill(1, 1, YarnSpec::default_sensor()).unwrap();
        assert_eq!(p.courses.len(), 1);
        assert_eq!(knit_needles(&p.courses[0]), vec![0]);
    }

    #[test]
    fn twill_5x4_total_knit_count() {
        let p = build_twill(5, 4, YarnSpec::default_sensor()).unwrap();
        let total: usize = p.courses.iter().map(|c| knit_needles(c).len()).sum();
        assert_eq!(total, 10); // 2*ceil(5/2) + 2*floor(5/2)
    }

    #[test]
    fn twill_zero_dimension_rejected() {
        assert_eq!(
            build_twill(0, 3, YarnSpec::default_sensor()).unwrap_err(),
            KnitError::InvalidDimension
        );
        assert_eq!(
            build_twill(3, 0, YarnSpec::default_sensor()).unwrap_err(),
            KnitError::InvalidDimension
        );
    }

    #[test]
    fn twill_course_structure_properties() {
        for (w, h) in [(3u32, 5u32), (8, 8), (7, 2)] {
            let p = build_twill(w, h, YarnSpec::default_sensor()).unwrap();
            for pair in p.courses.windows(2) {
                let a = knit_needles(&pair[0]);
                let b = knit_needles(&pair[1]);
                // adjacent courses never knit the same needle parity
                assert!(a.iter().all(|n| !b.contains(n)));
            }
            for c in &p.courses {
                assert_eq!(c.actions.len(), w as usize);
                let k = knit_needles(c).len();
                assert!(k == (w as usize).div_ceil(2) || k == w as usize / 2);
            }
        }
    }

    #[test]
    fn variant_tubular_tucks_only_outermost() {
        let v = variant(VariantName::PTh);
        let p = build_variant(&v, 8, 8).unwrap();
        for course in &p.courses {
            for action in &course.actions {
                if action.op.kind == StitchKind::Tuck {
                    assert!(action.needle == 0 || action.needle == 7);
                }
            }
        }
        let tucks: usize = p
            .courses
            .iter()
            .flat_map(|c| &c.actions)
            .filter(|a| a.op.kind == StitchKind::Tuck)
            .count();
        assert!(tucks > 0);
    }

    #[test]
    fn variant_ppr_substrate_tucks_back() {
        let v = variant(VariantName::PPr);
        let p = build_variant(&v, 8, 8).unwrap();
        for course in &p.courses {
            if p.yarns[course.yarn].role == YarnRole::Substrate {
                let tucks: Vec<_> = course
                    .actions
                    .iter()
                    .filter(|a| a.op.kind == StitchKind::Tuck)
                    .collect();
                assert_eq!(tucks.len(), 1, "one inter-face tuck per substrate course");
                assert_eq!(tucks[0].op.bed, Bed::Back);
                assert!(tucks[0].needle <= 1, "connection at course start");
            }
        }
    }

    #[test]
    fn variant_prp_sensor_tucks_front() {
        let v = variant(VariantName::PRp);
        let p = build_variant(&v, 6, 4).unwrap();
        for course in &p.courses {
            if p.yarns[course.yarn].role == YarnRole::Sensor {
                let tucks: Vec<_> = course
                    .actions
                    .iter()
                    .filter(|a| a.op.kind == StitchKind::Tuck)
                    .collect();
                assert_eq!(tucks.len(), 1);
                assert_eq!(tucks[0].op.bed, Bed::Front);
                assert!(tucks[0].needle <= 1);
            }
        }
    }

    #[test]
    fn variant_minimal_has_two_connector_courses() {
        let v = variant(VariantName::PTh);
        let p = build_variant(&v, 2, 2).unwrap();
        assert_eq!(p.connector_courses().len(), 2);
    }

    #[test]
    fn variant_too_small_rejected() {
        let v = variant(VariantName::PTh);
        assert_eq!(build_variant(&v, 1, 4).unwrap_err(), KnitError::SensorTooSmall);
    }

    #[test]
    fn catalog_fields_exhaustive() {
        use Structure::*;
        let cat = variant_catalog();
        assert_eq!(cat.len(), 10);
        let expect: [(&str, Structure, u32, u32, f64, f64, Option<f64>); 10] = [
            ("P_Tl", Tubular, 6, 0, 13.1, 13.5, None),
            ("P_Tm", Tubular, 6, 0, 13.1, 12.5, None),
            ("P_Th", Tubular, 6, 0, 13.1, 11.5, None),
            ("P_RP", RTuckedToP, 6, 0, 13.1, 12.0, Some(9.0)),
            ("P_PR", PTuckedToR, 6, 0, 13.1, 12.0, Some(9.0)),
            ("PL1_m", PTuckedToR, 5, 1, 12.5, 12.5, Some(9.0)),
            ("PL1_h", PTuckedToR, 5, 1, 12.5, 11.5, Some(9.0)),
            ("PL1_ml", PTuckedToR, 5, 1, 12.5, 12.5, Some(9.5)),
            ("PL2_m+", PTuckedToR, 4, 2, 12.0, 11.8, Some(9.0)),
            ("PL2_hl", PTuckedToR, 4, 2, 12.0, 11.5, Some(9.5)),
        ];
        for (v, e) in cat.iter().zip(expect.iter()) {
            assert_eq!(v.name.as_str(), e.0);
            assert_eq!(v.structure, e.1);
            assert_eq!(v.pes_threads, e.2);
            assert_eq!(v.lycra_threads, e.3);
            assert_eq!(v.np_pes, e.4);
            assert_eq!(v.np_res, e.5);
            assert_eq!(v.np_tuck, e.6);
        }
    }

    proptest::proptest! {
        #[test]
        fn twill_invariants_hold(w in 1u32..24, h in 1u32..24) {
            let p = build_twill(w, h, YarnSpec::default_sensor()).unwrap();
            proptest::prop_assert_eq!(p.courses.len(), h as usize);
            for (ci, course) in p.courses.iter().enumerate() {
                proptest::prop_assert_eq!(course.actions.len(), w as usize);
                let knits = knit_needles(course);
                let expect = if ci % 2 == 0 { (w as usize).div_ceil(2) } else { w as usize / 2 };
                proptest::prop_assert_eq!(knits.len(), expect);
                for n in &knits {
                    proptest::prop_assert_eq!((n + ci as u32) % 2, 0);
                }
            }
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for name in VariantName::ALL {
            let parsed: VariantName = name.as_str().parse().unwrap();
            assert_eq!(parsed, name);
        }
        assert!("P_xx".parse::<VariantName>().is_err());
    }

    #[test]
    fn default_yarn_resistance_ratio() {
        let s = YarnSpec::default_sensor().linear_resistance.unwrap();
        let c = YarnSpec::default_connector().linear_resistance.unwrap();
        assert!(s / c >= 1e3);
    }

    #[test]
    fn grid_string_renders_ops() {
        let v = variant(VariantName::PPr);
        let p = build_variant(&v, 4, 2).unwrap();
        let text = p.grid_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), p.courses.len());
        assert!(lines[0].starts_with("HC40"));
        assert!(lines[0].ends_with("KKKK"));
        // substrate course: tuck rendered on the back bed
        assert!(lines[1].contains('T'));
        assert!(lines[1].contains('k'));
    }
}
