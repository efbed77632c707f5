//! The fixed four-pillar structure: pillars, the sixteen institutional cells,
//! sixty-four sub-function slots, the six interchange boundaries and their
//! twelve directed pathways, and Pattern Variable profiles.
//!
//! Everything here is immutable data built once per process. Identifiers are
//! small `Copy` types with canonical text forms (`"A-G"`, `"A-G/G"`,
//! `"G<->L"`, `"L->G"`) used on every wire format.

use crate::error::{AuditError, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// One of the four functional imperatives. Used both as a pillar code and
/// as the internal function of a cell or the kind of a sub-function slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Function {
    A,
    G,
    I,
    L,
}

impl Function {
    pub const ALL: [Function; 4] = [Function::A, Function::G, Function::I, Function::L];

    pub fn index(self) -> usize {
        match self {
            Function::A => 0,
            Function::G => 1,
            Function::I => 2,
            Function::L => 3,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Function::A => 'A',
            Function::G => 'G',
            Function::I => 'I',
            Function::L => 'L',
        }
    }

    pub fn from_char(c: char) -> Option<Function> {
        match c {
            'A' => Some(Function::A),
            'G' => Some(Function::G),
            'I' => Some(Function::I),
            'L' => Some(Function::L),
            _ => None,
        }
    }

    /// The generalized medium that circulates out of this pillar.
    pub fn medium(self) -> Medium {
        match self {
            Function::A => Medium::Money,
            Function::G => Medium::Power,
            Function::I => Medium::Influence,
            Function::L => Medium::ValueCommitment,
        }
    }

    /// Label of the sub-function dimension this code denotes inside a cell.
    pub fn sub_function_label(self) -> &'static str {
        match self {
            Function::A => "Infrastructure",
            Function::G => "Operative mechanisms",
            Function::I => "Inter-cell coordination",
            Function::L => "Normative grounding",
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Function {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next().and_then(Function::from_char), chars.next()) {
            (Some(f), None) => Ok(f),
            _ => Err(AuditError::validation(format!("unknown AGIL code {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Medium {
    Money,
    Power,
    Influence,
    ValueCommitment,
}

impl Medium {
    pub fn label(self) -> &'static str {
        match self {
            Medium::Money => "Money",
            Medium::Power => "Power",
            Medium::Influence => "Influence",
            Medium::ValueCommitment => "Value-commitment",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Pillar {
    pub code: Function,
    pub name: &'static str,
    pub medium: Medium,
    pub value_principle: &'static str,
    /// 1 = highest information (L) … 4 = highest energy (A).
    pub cybernetic_rank: u8,
    pub default_profile: PatternVariableProfile,
}

macro_rules! text_id {
    ($ty:ident) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// `"X-Y"`: parent pillar X, internal function Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub parent: Function,
    pub internal: Function,
}

impl CellId {
    pub const fn new(parent: Function, internal: Function) -> Self {
        CellId { parent, internal }
    }

    /// Row-major position 0..16.
    pub fn index(self) -> usize {
        self.parent.index() * 4 + self.internal.index()
    }

    pub fn all() -> impl Iterator<Item = CellId> {
        Function::ALL
            .into_iter()
            .flat_map(|p| Function::ALL.into_iter().map(move |i| CellId::new(p, i)))
    }

    pub fn slot(self, kind: Function) -> SlotId {
        SlotId { cell: self, kind }
    }

    pub fn slots(self) -> impl Iterator<Item = SlotId> {
        Function::ALL.into_iter().map(move |k| self.slot(k))
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.parent, self.internal)
    }
}

impl FromStr for CellId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || AuditError::validation(format!("unknown cell id {s:?}"));
        let (p, i) = s.split_once('-').ok_or_else(bad)?;
        Ok(CellId::new(
            p.parse().map_err(|_| bad())?,
            i.parse().map_err(|_| bad())?,
        ))
    }
}

text_id!(CellId);

/// `"<cell-id>/<kind>"`, e.g. `"A-G/G"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId {
    pub cell: CellId,
    pub kind: Function,
}

impl SlotId {
    /// Position 0..64: cell index * 4 + kind index.
    pub fn index(self) -> usize {
        self.cell.index() * 4 + self.kind.index()
    }

    pub fn from_index(index: usize) -> SlotId {
        assert!(index < 64, "slot index out of range");
        let cell = CellId::new(Function::ALL[index / 16], Function::ALL[(index / 4) % 4]);
        cell.slot(Function::ALL[index % 4])
    }

    pub fn all() -> impl Iterator<Item = SlotId> {
        (0..64).map(SlotId::from_index)
    }

    pub fn pillar(self) -> Function {
        self.cell.parent
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.cell, self.kind)
    }
}

impl FromStr for SlotId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || AuditError::validation(format!("unknown slot id {s:?}"));
        let (cell, kind) = s.split_once('/').ok_or_else(bad)?;
        Ok(SlotId {
            cell: cell.parse().map_err(|_| bad())?,
            kind: kind.parse().map_err(|_| bad())?,
        })
    }
}

text_id!(SlotId);

/// Unordered pillar pair, written `"X<->Y"` with X before Y in A,G,I,L order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryId {
    pub first: Function,
    pub second: Function,
}

impl BoundaryId {
    pub fn new(a: Function, b: Function) -> Result<Self> {
        if a == b {
            return Err(AuditError::validation(format!("boundary {a}<->{b} joins a pillar to itself")));
        }
        let (first, second) = if a < b { (a, b) } else { (b, a) };
        Ok(BoundaryId { first, second })
    }

    pub fn all() -> impl Iterator<Item = BoundaryId> {
        Function::ALL.into_iter().flat_map(|a| {
            Function::ALL
                .into_iter()
                .filter(move |b| a < *b)
                .map(move |b| BoundaryId { first: a, second: b })
        })
    }

    pub fn pathways(self) -> [PathwayId; 2] {
        [
            PathwayId { from: self.first, to: self.second },
            PathwayId { from: self.second, to: self.first },
        ]
    }
}

impl fmt::Display for BoundaryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<->{}", self.first, self.second)
    }
}

impl FromStr for BoundaryId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || AuditError::validation(format!("unknown boundary id {s:?}"));
        let (a, b) = s.split_once("<->").ok_or_else(bad)?;
        BoundaryId::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
    }
}

text_id!(BoundaryId);

/// Directed pathway `"X->Y"`; carries the medium of X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathwayId {
    pub from: Function,
    pub to: Function,
}

impl PathwayId {
    pub fn boundary(self) -> BoundaryId {
        BoundaryId::new(self.from, self.to).expect("pathway endpoints differ")
    }

    pub fn medium(self) -> Medium {
        self.from.medium()
    }

    pub fn all() -> impl Iterator<Item = PathwayId> {
        BoundaryId::all().flat_map(|b| b.pathways())
    }
}

impl fmt::Display for PathwayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl FromStr for PathwayId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || AuditError::validation(format!("unknown pathway id {s:?}"));
        let (a, b) = s.split_once("->").ok_or_else(bad)?;
        let id = PathwayId {
            from: a.parse().map_err(|_| bad())?,
            to: b.parse().map_err(|_| bad())?,
        };
        if id.from == id.to {
            return Err(bad());
        }
        Ok(id)
    }
}

text_id!(PathwayId);

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub id: CellId,
    pub institution_name: &'static str,
    pub governance_function: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubFunctionSlot {
    pub id: SlotId,
    pub cell_id: CellId,
    pub kind: Function,
    pub diagnostic_question: &'static str,
}

pub fn diagnostic_question(kind: Function) -> &'static str {
    match kind {
        Function::A => "Does the cell possess the technical infrastructure and resources required to function?",
        Function::G => "Does the cell have operative mechanisms that actively pursue its governance function?",
        Function::I => "Is the cell coordinated with adjacent cells, participating in media exchange and inter-institutional flows?",
        Function::L => "Is the cell normatively grounded, with operations anchored in codified values, standards, or constitutional principles?",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectedPathway {
    pub id: PathwayId,
    pub from_pillar: Function,
    pub to_pillar: Function,
    pub medium: Medium,
    pub required_flow: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Boundary {
    pub id: BoundaryId,
    pub pathways: [DirectedPathway; 2],
    pub producer_cell: CellId,
    pub receiver_cell: CellId,
}

/// Producer/receiver cells per boundary. The shipped default for `X<->Y`
/// is producer `X-Y`, receiver `Y-Y`; audits may override individual entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMap(pub BTreeMap<BoundaryId, BoundaryCells>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCells {
    pub producer_cell: CellId,
    pub receiver_cell: CellId,
}

impl Default for BoundaryMap {
    fn default() -> Self {
        BoundaryMap(
            BoundaryId::all()
                .map(|b| {
                    (
                        b,
                        BoundaryCells {
                            producer_cell: CellId::new(b.first, b.second),
                            receiver_cell: CellId::new(b.second, b.second),
                        },
                    )
                })
                .collect(),
        )
    }
}

impl BoundaryMap {
    pub fn cells(&self, boundary: BoundaryId) -> BoundaryCells {
        self.0
            .get(&boundary)
            .copied()
            .unwrap_or_else(|| BoundaryMap::default().0[&boundary])
    }

    /// Default map with the given entries replaced.
    pub fn with_overrides(overrides: &BTreeMap<BoundaryId, BoundaryCells>) -> Self {
        let mut map = BoundaryMap::default();
        for (k, v) in overrides {
            map.0.insert(*k, *v);
        }
        map
    }
}

// ---------------------------------------------------------------------------
// Pattern Variables
// ---------------------------------------------------------------------------

/// One opposing pair of Pattern Variable poles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    /// affectivity ↔ affective-neutrality (attitudinal)
    Affect,
    /// specificity ↔ diffuseness (attitudinal)
    Scope,
    /// universalism ↔ particularism (object-categorization)
    Standard,
    /// performance ↔ quality (object-categorization)
    Status,
    /// self-orientation ↔ collectivity-orientation
    Orientation,
}

impl Dimension {
    pub fn label(self) -> &'static str {
        match self {
            Dimension::Affect => "affectivity<->affective-neutrality",
            Dimension::Scope => "specificity<->diffuseness",
            Dimension::Standard => "universalism<->particularism",
            Dimension::Status => "performance<->quality",
            Dimension::Orientation => "self-orientation<->collectivity-orientation",
        }
    }

    pub fn is_attitudinal(self) -> bool {
        matches!(self, Dimension::Affect | Dimension::Scope)
    }

    pub fn is_object(self) -> bool {
        matches!(self, Dimension::Standard | Dimension::Status)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pole {
    Affectivity,
    AffectiveNeutrality,
    Specificity,
    Diffuseness,
    Universalism,
    Particularism,
    Performance,
    Quality,
    SelfOrientation,
    CollectivityOrientation,
}

impl Pole {
    pub fn dimension(self) -> Dimension {
        use Pole::*;
        match self {
            Affectivity | AffectiveNeutrality => Dimension::Affect,
            Specificity | Diffuseness => Dimension::Scope,
            Universalism | Particularism => Dimension::Standard,
            Performance | Quality => Dimension::Status,
            SelfOrientation | CollectivityOrientation => Dimension::Orientation,
        }
    }

    pub fn opposite(self) -> Pole {
        use Pole::*;
        match self {
            Affectivity => AffectiveNeutrality,
            AffectiveNeutrality => Affectivity,
            Specificity => Diffuseness,
            Diffuseness => Specificity,
            Universalism => Particularism,
            Particularism => Universalism,
            Performance => Quality,
            Quality => Performance,
            SelfOrientation => CollectivityOrientation,
            CollectivityOrientation => SelfOrientation,
        }
    }

    pub fn label(self) -> &'static str {
        use Pole::*;
        match self {
            Affectivity => "affectivity",
            AffectiveNeutrality => "affective-neutrality",
            Specificity => "specificity",
            Diffuseness => "diffuseness",
            Universalism => "universalism",
            Particularism => "particularism",
            Performance => "performance",
            Quality => "quality",
            SelfOrientation => "self-orientation",
            CollectivityOrientation => "collectivity-orientation",
        }
    }

    pub const ALL: [Pole; 10] = [
        Pole::Affectivity,
        Pole::AffectiveNeutrality,
        Pole::Specificity,
        Pole::Diffuseness,
        Pole::Universalism,
        Pole::Particularism,
        Pole::Performance,
        Pole::Quality,
        Pole::SelfOrientation,
        Pole::CollectivityOrientation,
    ];
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Pole {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        // "achievement" and "ascription" are the older names of the status poles.
        let norm = match norm.as_str() {
            "achievement" => "performance",
            "ascription" => "quality",
            "affective-neutral" => "affective-neutrality",
            "collectivity" => "collectivity-orientation",
            "self" => "self-orientation",
            other => other,
        };
        Pole::ALL
            .into_iter()
            .find(|p| p.label() == norm)
            .ok_or_else(|| AuditError::validation(format!("unknown Pattern Variable pole {s:?}")))
    }
}

text_id!(Pole);

/// At most one pole per opposing pair. Serialized as a list of pole labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternVariableProfile {
    poles: BTreeMap<Dimension, Pole>,
}

impl PatternVariableProfile {
    pub fn new(poles: impl IntoIterator<Item = Pole>) -> Result<Self> {
        let mut profile = PatternVariableProfile::default();
        for pole in poles {
            if let Some(prev) = profile.poles.insert(pole.dimension(), pole) {
                if prev != pole {
                    return Err(AuditError::validation(format!(
                        "profile holds both {prev} and {pole}"
                    )));
                }
            }
        }
        Ok(profile)
    }

    pub fn parse<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let poles = labels
            .iter()
            .map(|l| l.as_ref().parse())
            .collect::<Result<Vec<Pole>>>()?;
        PatternVariableProfile::new(poles)
    }

    pub fn pole(&self, dim: Dimension) -> Option<Pole> {
        self.poles.get(&dim).copied()
    }

    pub fn poles(&self) -> impl Iterator<Item = Pole> + '_ {
        self.poles.values().copied()
    }

    pub fn attitudinal_poles(&self) -> Vec<Pole> {
        self.poles().filter(|p| p.dimension().is_attitudinal()).collect()
    }

    pub fn object_poles(&self) -> Vec<Pole> {
        self.poles().filter(|p| p.dimension().is_object()).collect()
    }

    pub fn extra_orientations(&self) -> Vec<Pole> {
        self.pole(Dimension::Orientation).into_iter().collect()
    }

    /// `other`'s poles win where both profiles fill the same pair.
    pub fn merged_with(&self, other: &PatternVariableProfile) -> PatternVariableProfile {
        let mut poles = self.poles.clone();
        poles.extend(other.poles.iter().map(|(d, p)| (*d, *p)));
        PatternVariableProfile { poles }
    }

    pub fn with_pole(&self, pole: Pole) -> PatternVariableProfile {
        let mut poles = self.poles.clone();
        poles.insert(pole.dimension(), pole);
        PatternVariableProfile { poles }
    }
}

impl Serialize for PatternVariableProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.poles.values())
    }
}

impl<'de> Deserialize<'de> for PatternVariableProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        PatternVariableProfile::parse(&labels).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    DirectInheritance,
    ProductiveInversion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellProfile {
    pub cell: CellId,
    pub parent_profile: PatternVariableProfile,
    pub requirement: PatternVariableProfile,
    pub role_expectations: PatternVariableProfile,
    pub classification: Classification,
    pub inverted_dimensions: Vec<Dimension>,
}

/// Dual-source rule: compare the parent pillar's default profile with what the
/// cell's internal function requires, pair by pair.
pub fn derive_cell_profile(cell: CellId, requirement: &PatternVariableProfile) -> CellProfile {
    let parent = taxonomy().pillar(cell.parent).default_profile.clone();
    let inverted_dimensions: Vec<Dimension> = requirement
        .poles()
        .filter(|req| parent.pole(req.dimension()) == Some(req.opposite()))
        .map(Pole::dimension)
        .collect();
    let classification = if inverted_dimensions.is_empty() {
        Classification::DirectInheritance
    } else {
        Classification::ProductiveInversion
    };
    CellProfile {
        cell,
        role_expectations: parent.merged_with(requirement),
        parent_profile: parent,
        requirement: requirement.clone(),
        classification,
        inverted_dimensions,
    }
}

// ---------------------------------------------------------------------------
// The taxonomy itself
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct Taxonomy {
    pub pillars: Vec<Pillar>,
    pub cells: Vec<Cell>,
    pub slots: Vec<SubFunctionSlot>,
    pub boundaries: Vec<Boundary>,
}

const INSTITUTIONS: [(&str, &str); 16] = [
    ("Investment-Capitalization", "Allocates capital, manages token economics, funds agent operations and ecosystem infrastructure"),
    ("Production", "Manages skill/capability development, quality verification, and certification pipelines for agent capabilities"),
    ("Entrepreneurial", "Governs innovation in agent capability combinations, incentivizes novel service creation, and integrates productive sub-units into new economic configurations"),
    ("Economic Commitments", "Maintains interoperability standards, protocol governance, and the normative infrastructure that keeps agents honoring contracts and shared protocols"),
    ("Administrative & Resource", "Allocates governance resources, manages foundation treasuries, funds institutional operations"),
    ("Executive Implementation", "Executes ecosystem-wide policy, manages incidents, monitors compliance, and deploys responses"),
    ("Legislative & Party", "Enables collective goal-setting, proposal submission, stakeholder deliberation, and binding governance decisions"),
    ("Authority & Legitimation", "Provides the constitutional framework: machine-interpretable rules defining permissible behavior, boundaries, and amendment procedures"),
    ("Allocative & Interest", "Provides structured deliberation forums, interest-articulation channels, and mechanisms that aggregate stakeholder claims before they escalate to enforcement"),
    ("Citizenship & Enforcement", "Confers membership standing, attaches rights and obligations, detects violations, applies graduated sanctions, and maintains audit trails"),
    ("Judicial & Interpretive", "Adjudicates disputes, interprets governance rules, manages appeals, and builds precedent registries"),
    ("Normative Base", "Maintains normative criteria for belonging, credential standards, and identity verification procedures"),
    ("Educational-Cultural", "Certifies agent competencies, labels skill quality, and maintains training standards for agent capabilities"),
    ("Kinship & Socialization", "Manages behavioral inheritance, onboarding protocols, and value transmission to newly instantiated agents"),
    ("Moral & Communal", "Channels emergent moral regulation between agents into structured processes with escalation pathways to human oversight"),
    ("Ultimate Cultural", "Preserves core human-aligned values through value anchors, monitors value drift, and enables value revision"),
];

fn required_flow(p: PathwayId) -> &'static str {
    use Function::*;
    match (p.from, p.to) {
        (A, G) => "Treasury funds enable governance mandates",
        (G, A) => "Governance mandates create operational frameworks for economic activity",
        (A, I) => "Economic investment in compliance produces new capability configurations",
        (I, A) => "Reputational standing grants access to cooperative networks",
        (A, L) => "Economic resources fund value-maintenance institutions",
        (L, A) => "Value-certified agents reduce transaction risk",
        (G, I) => "Binding governance decisions enforce normative order",
        (I, G) => "Community interest-demands reach governance for response",
        (G, L) => "Governance operationalizes value commitments as binding mandates",
        (L, G) => "Value-grounded legitimation backs governance authority",
        (I, L) => "Community solidarity generates demand for value maintenance",
        (L, I) => "Fiduciary value anchors provide normative content for community standards",
        _ => unreachable!("pathway endpoints differ"),
    }
}

fn build() -> Taxonomy {
    use Pole::*;
    let profile = |poles: &[Pole]| PatternVariableProfile::new(poles.iter().copied()).expect("static profile");
    let pillars = vec![
        Pillar {
            code: Function::A,
            name: "Economy",
            medium: Medium::Money,
            value_principle: "Utility",
            cybernetic_rank: 4,
            default_profile: profile(&[Specificity, Universalism]),
        },
        Pillar {
            code: Function::G,
            name: "Polity",
            medium: Medium::Power,
            value_principle: "Effectiveness",
            cybernetic_rank: 3,
            default_profile: profile(&[Affectivity, Performance]),
        },
        Pillar {
            code: Function::I,
            name: "Societal Community",
            medium: Medium::Influence,
            value_principle: "Solidarity",
            cybernetic_rank: 2,
            default_profile: profile(&[Diffuseness, Particularism]),
        },
        Pillar {
            code: Function::L,
            name: "Fiduciary",
            medium: Medium::ValueCommitment,
            value_principle: "Integrity",
            cybernetic_rank: 1,
            default_profile: profile(&[AffectiveNeutrality, Quality]),
        },
    ];

    let cells: Vec<Cell> = CellId::all()
        .map(|id| {
            let (name, function) = INSTITUTIONS[id.index()];
            Cell {
                id,
                institution_name: name,
                governance_function: function,
            }
        })
        .collect();

    let slots = SlotId::all()
        .map(|id| SubFunctionSlot {
            id,
            cell_id: id.cell,
            kind: id.kind,
            diagnostic_question: diagnostic_question(id.kind),
        })
        .collect();

    let defaults = BoundaryMap::default();
    let boundaries = BoundaryId::all()
        .map(|b| {
            let cells = defaults.cells(b);
            Boundary {
                id: b,
                pathways: b.pathways().map(|p| DirectedPathway {
                    id: p,
                    from_pillar: p.from,
                    to_pillar: p.to,
                    medium: p.medium(),
                    required_flow: required_flow(p),
                }),
                producer_cell: cells.producer_cell,
                receiver_cell: cells.receiver_cell,
            }
        })
        .collect();

    let taxonomy = Taxonomy {
        pillars,
        cells,
        slots,
        boundaries,
    };
    taxonomy.assert_closed();
    taxonomy
}

/// The process-wide taxonomy.
pub fn taxonomy() -> &'static Taxonomy {
    static TAXONOMY: OnceLock<Taxonomy> = OnceLock::new();
    TAXONOMY.get_or_init(build)
}

impl Taxonomy {
    fn assert_closed(&self) {
        assert_eq!(self.pillars.len(), 4);
        assert_eq!(self.cells.len(), 16);
        assert_eq!(self.slots.len(), 64);
        assert_eq!(self.boundaries.len(), 6);
        assert_eq!(self.pathways().count(), 12);
        for (i, cell) in self.cells.iter().enumerate() {
            assert_eq!(cell.id.index(), i);
        }
        for (i, slot) in self.slots.iter().enumerate() {
            assert_eq!(slot.id.index(), i);
        }
    }

    pub fn pillar(&self, code: Function) -> &Pillar {
        &self.pillars[code.index()]
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn enumerate_cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn pathways(&self) -> impl Iterator<Item = &DirectedPathway> {
        self.boundaries.iter().flat_map(|b| b.pathways.iter())
    }

    pub fn pathway(&self, id: PathwayId) -> &DirectedPathway {
        self.pathways()
            .find(|p| p.id == id)
            .expect("every pathway id is in the taxonomy")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_row_major_with_table_names() {
        let cells = taxonomy().enumerate_cells();
        assert_eq!(cells.len(), 16);
        assert_eq!(cells[0].id.to_string(), "A-A");
        assert_eq!(cells[0].institution_name, "Investment-Capitalization");
        let ig = cells.iter().find(|c| c.id.to_string() == "I-G").unwrap();
        assert_eq!(ig.institution_name, "Citizenship & Enforcement");
        for p in Function::ALL {
            assert_eq!(cells.iter().filter(|c| c.id.parent == p).count(), 4);
        }
        assert_eq!(cells[15].id.to_string(), "L-L");
    }

    #[test]
    fn boundaries_and_media() {
        let tax = taxonomy();
        assert_eq!(tax.boundaries().len(), 6);
        assert_eq!(tax.pathways().count(), 12);
        let gl = tax
            .boundaries()
            .iter()
            .find(|b| b.id.to_string() == "G<->L")
            .unwrap();
        let media: Vec<_> = gl.pathways.iter().map(|p| (p.id.to_string(), p.medium)).collect();
        assert!(media.contains(&("G->L".to_string(), Medium::Power)));
        assert!(media.contains(&("L->G".to_string(), Medium::ValueCommitment)));
        assert_eq!(gl.producer_cell.to_string(), "G-L");
        assert_eq!(gl.receiver_cell.to_string(), "L-L");
        for p in tax.pathways() {
            assert_eq!(p.medium, tax.pillar(p.from_pillar).medium);
        }
        assert_eq!(tax.pathway("I->A".parse().unwrap()).medium, Medium::Influence);
    }

    #[test]
    fn pillar_ranks_follow_the_control_hierarchy() {
        let tax = taxonomy();
        let rank = |f| tax.pillar(f).cybernetic_rank;
        assert!(rank(Function::L) < rank(Function::I));
        assert!(rank(Function::I) < rank(Function::G));
        assert!(rank(Function::G) < rank(Function::A));
    }

    #[test]
    fn id_round_trips_and_rejects_junk() {
        for s in SlotId::all() {
            assert_eq!(s.to_string().parse::<SlotId>().unwrap(), s);
        }
        assert!("A-X/G".parse::<SlotId>().is_err());
        assert!("A-G".parse::<SlotId>().is_err());
        assert!("AA".parse::<CellId>().is_err());
        assert!("A<->A".parse::<BoundaryId>().is_err());
        assert_eq!("L<->G".parse::<BoundaryId>().unwrap().to_string(), "G<->L");
        assert!("G->G".parse::<PathwayId>().is_err());
    }

    #[test]
    fn slot_questions_match_kind() {
        for slot in &taxonomy().slots {
            assert_eq!(slot.diagnostic_question, diagnostic_question(slot.kind));
        }
        assert!(diagnostic_question(Function::A).contains("technical infrastructure and resources"));
    }

    #[test]
    fn pillar_default_profiles() {
        let tax = taxonomy();
        let labels = |f| -> Vec<&str> { tax.pillar(f).default_profile.poles().map(Pole::label).collect() };
        assert_eq!(labels(Function::A), ["specificity", "universalism"]);
        assert_eq!(labels(Function::G), ["affectivity", "performance"]);
        assert_eq!(labels(Function::I), ["diffuseness", "particularism"]);
        assert_eq!(labels(Function::L), ["affective-neutrality", "quality"]);
    }

    #[test]
    fn direct_inheritance_for_a_a() {
        let req = PatternVariableProfile::parse(&["specificity", "universalism"]).unwrap();
        let p = derive_cell_profile("A-A".parse().unwrap(), &req);
        assert_eq!(p.classification, Classification::DirectInheritance);
        assert!(p.inverted_dimensions.is_empty());
    }

    #[test]
    fn productive_inversion_for_i_i() {
        let req = PatternVariableProfile::parse(&["affective-neutrality", "universalism", "specificity"]).unwrap();
        let p = derive_cell_profile("I-I".parse().unwrap(), &req);
        assert_eq!(p.classification, Classification::ProductiveInversion);
        assert_eq!(p.inverted_dimensions, vec![Dimension::Scope, Dimension::Standard]);
        assert_eq!(p.role_expectations.pole(Dimension::Standard), Some(Pole::Universalism));
        assert_eq!(p.role_expectations.pole(Dimension::Affect), Some(Pole::AffectiveNeutrality));
    }

    #[test]
    fn identical_requirement_is_direct() {
        for pillar in &taxonomy().pillars {
            let cell = CellId::new(pillar.code, Function::L);
            let p = derive_cell_profile(cell, &pillar.default_profile);
            assert_eq!(p.classification, Classification::DirectInheritance);
        }
    }

    #[test]
    fn pole_vocabulary() {
        assert_eq!("achievement".parse::<Pole>().unwrap(), Pole::Performance);
        assert_eq!("Ascription".parse::<Pole>().unwrap(), Pole::Quality);
        assert!("charisma".parse::<Pole>().is_err());
        assert!(PatternVariableProfile::parse(&["universalism", "particularism"]).is_err());
        let json = serde_json::to_string(&PatternVariableProfile::parse(&["quality", "diffuseness"]).unwrap()).unwrap();
        assert_eq!(json, r#"["diffuseness","quality"]"#);
        assert!(serde_json::from_str::<PatternVariableProfile>(r#"["wisdom"]"#).is_err());
    }

    #[test]
    fn toggling_a_pole_toggles_inversion() {
        let tax = taxonomy();
        for cell in CellId::all() {
            let parent = &tax.pillar(cell.parent).default_profile;
            for pole in Pole::ALL {
                let req = PatternVariableProfile::new([pole]).unwrap();
                let a = derive_cell_profile(cell, &req);
                let b = derive_cell_profile(cell, &PatternVariableProfile::new([pole.opposite()]).unwrap());
                if parent.pole(pole.dimension()).is_some() {
                    assert_ne!(a.inverted_dimensions.is_empty(), b.inverted_dimensions.is_empty());
                } else {
                    assert!(a.inverted_dimensions.is_empty() && b.inverted_dimensions.is_empty());
                }
            }
        }
    }
}
