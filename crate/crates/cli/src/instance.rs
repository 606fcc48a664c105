//! Instance files: a TOML document naming matroids, valuations and
//! integer-vector functions over one ground set, plus problem parameters.
//! Rationals are written as integers or as strings `"p/q"`; `"inf"` is
//! accepted wherever a value may be infinite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use valmat::matroid::{
    make_free, make_from_bases, make_graphic, make_linear, make_partition, make_uniform, ExplicitBaseFamily,
    MatroidOracle,
};
use valmat::primitives::{format_rational, modular_sum, parse_rational, vector_to_subset, ElementId, GroundSet};
use valmat::valuated::{
    disjoint_sum, dual_valuation, from_matroid_and_weights, from_table, indicator, laminar_convex_function,
    restrict_to_hyperplane, size_constrained_modular, LaminarSpec, MnatFunction, Restricted, UnivariateTable,
    ValuationOracle,
};
use valmat::{ExtValue, Rational, Subset};

use crate::CliError;

/// An exact number: an integer literal or a string such as `"-3/4"` or `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    pub fn from_rational(q: &Rational) -> Self {
        if q.is_integer() {
            if let Ok(i) = i64::try_from(q.numer().clone()) {
                return Num::Int(i);
            }
        }
        Num::Text(format_rational(q))
    }

    pub fn from_ext(x: &ExtValue) -> Self {
        match x {
            ExtValue::Finite(q) => Num::from_rational(q),
            ExtValue::Infinite => Num::Text("inf".into()),
        }
    }

    pub fn rational(&self, field: &str) -> Result<Rational, CliError> {
        match self {
            Num::Int(i) => Ok(Rational::from_integer((*i).into())),
            Num::Text(s) => parse_rational(s).map_err(|e| CliError::invalid(field, e)),
        }
    }

    pub fn ext(&self, field: &str) -> Result<ExtValue, CliError> {
        match self {
            Num::Int(i) => Ok(ExtValue::int(*i)),
            Num::Text(s) => ExtValue::parse(s).map_err(|e| CliError::invalid(field, e)),
        }
    }
}

/// An element given by index or by label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GroundSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSpec {
    pub elements: Vec<ElementRef>,
    pub capacity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MatroidSpec {
    Uniform {
        name: String,
        rank: usize,
    },
    Free {
        name: String,
    },
    Partition {
        name: String,
        blocks: Vec<BlockSpec>,
    },
    Graphic {
        name: String,
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Linear {
        name: String,
        columns: Vec<Vec<Num>>,
    },
    ExplicitBases {
        name: String,
        bases: Vec<Vec<ElementRef>>,
    },
}

impl MatroidSpec {
    pub fn name(&self) -> &str {
        match self {
            MatroidSpec::Uniform { name, .. }
            | MatroidSpec::Free { name }
            | MatroidSpec::Partition { name, .. }
            | MatroidSpec::Graphic { name, .. }
            | MatroidSpec::Linear { name, .. }
            | MatroidSpec::ExplicitBases { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub set: Vec<ElementRef>,
    pub value: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValuationSpec {
    /// Linear weights on the bases of a matroid.
    ModularOnMatroid {
        name: String,
        matroid: String,
        weights: Vec<Num>,
    },
    SizeConstrained {
        name: String,
        weights: Vec<Num>,
        rank: usize,
    },
    DualOf {
        name: String,
        of: String,
    },
    DisjointSum {
        name: String,
        of: Vec<String>,
    },
    Indicator {
        name: String,
        bases: Vec<Vec<ElementRef>>,
    },
    Table {
        name: String,
        entries: Vec<TableEntry>,
    },
}

impl ValuationSpec {
    pub fn name(&self) -> &str {
        match self {
            ValuationSpec::ModularOnMatroid { name, .. }
            | ValuationSpec::SizeConstrained { name, .. }
            | ValuationSpec::DualOf { name, .. }
            | ValuationSpec::DisjointSum { name, .. }
            | ValuationSpec::Indicator { name, .. }
            | ValuationSpec::Table { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberSpec {
    pub elements: Vec<ElementRef>,
    #[serde(default)]
    pub start: i64,
    /// Convex values at `start, start + 1, ...`.
    pub values: Vec<Num>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// Laminar convex function on a box, optionally restricted to `Σx = rank`.
    Laminar {
        name: String,
        lower: Vec<i64>,
        upper: Vec<i64>,
        members: Vec<MemberSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<i64>,
    },
    /// Linear weights on the 0/1 vectors of bases of a matroid.
    MatroidIndicator {
        name: String,
        matroid: String,
        weights: Vec<Num>,
    },
}

impl FunctionSpec {
    pub fn name(&self) -> &str {
        match self {
            FunctionSpec::Laminar { name, .. } | FunctionSpec::MatroidIndicator { name, .. } => name,
        }
    }
}

/// Parameters for whichever problem is solved; unused fields are ignored.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub valuations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matroids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays: Option<Vec<Vec<Num>>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub ground: GroundSpec,
    #[serde(default, rename = "matroid", skip_serializing_if = "Vec::is_empty")]
    pub matroids: Vec<MatroidSpec>,
    #[serde(default, rename = "valuation", skip_serializing_if = "Vec::is_empty")]
    pub valuations: Vec<ValuationSpec>,
    #[serde(default, rename = "function", skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub problem: ProblemSpec,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance serializes")
    }
}

/// Resolved objects of an instance.
pub struct Model {
    pub ground: GroundSet,
    pub matroids: BTreeMap<String, MatroidOracle>,
    pub valuations: BTreeMap<String, ValuationOracle>,
    pub functions: BTreeMap<String, MnatFunction>,
    pub problem: ProblemSpec,
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, what: &str, name: &str, value: T) -> Result<(), CliError> {
    if map.insert(name.to_string(), value).is_some() {
        return Err(CliError::invalid(&format!("{what} '{name}'"), "duplicate name"));
    }
    Ok(())
}

impl Model {
    pub fn build(file: &InstanceFile) -> Result<Self, CliError> {
        let ground = match (&file.ground.labels, file.ground.size) {
            (Some(labels), size) => {
                if size.is_some_and(|s| s != labels.len()) {
                    return Err(CliError::invalid("ground", "size differs from the number of labels"));
                }
                GroundSet::with_labels(labels.clone()).map_err(|e| CliError::invalid("ground.labels", e))?
            }
            (None, Some(size)) => GroundSet::new(size).map_err(|e| CliError::invalid("ground.size", e))?,
            (None, None) => return Err(CliError::invalid("ground", "needs size or labels")),
        };
        let mut model = Model {
            ground,
            matroids: BTreeMap::new(),
            valuations: BTreeMap::new(),
            functions: BTreeMap::new(),
            problem: file.problem.clone(),
        };
        for spec in &file.matroids {
            let field = format!("matroid '{}'", spec.name());
            let m = model.build_matroid(spec).map_err(|e| e.within(&field))?;
            insert_unique(&mut model.matroids, "matroid", spec.name(), m)?;
        }
        for spec in &file.valuations {
            let field = format!("valuation '{}'", spec.name());
            let v = model.build_valuation(spec).map_err(|e| e.within(&field))?;
            insert_unique(&mut model.valuations, "valuation", spec.name(), v)?;
        }
        for spec in &file.functions {
            let field = format!("function '{}'", spec.name());
            let f = model.build_function(spec).map_err(|e| e.within(&field))?;
            insert_unique(&mut model.functions, "function", spec.name(), f)?;
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.ground.size()
    }

    pub fn element(&self, r: &ElementRef) -> Result<usize, CliError> {
        match r {
            ElementRef::Index(i) if *i < self.n() => Ok(*i),
            ElementRef::Index(i) => Err(CliError::invalid("element", format!("index {i} out of range"))),
            ElementRef::Label(l) => self
                .ground
                .index_of(l)
                .map(|e| e.0)
                .ok_or_else(|| CliError::invalid("element", format!("unknown label '{l}'"))),
        }
    }

    pub fn subset(&self, refs: &[ElementRef]) -> Result<Subset, CliError> {
        let idx = refs.iter().map(|r| self.element(r)).collect::<Result<Vec<_>, _>>()?;
        Ok(Subset::from_indices(self.n(), idx))
    }

    pub fn labels_of(&self, x: &Subset) -> Vec<String> {
        x.iter().map(|i| self.label(i)).collect()
    }

    pub fn label(&self, i: usize) -> String {
        self.ground.label(ElementId(i))
    }

    pub fn weights(&self, field: &str, w: &[Num]) -> Result<Vec<Rational>, CliError> {
        if w.len() != self.n() {
            return Err(CliError::invalid(
                field,
                format!("expected {} entries, found {}", self.n(), w.len()),
            ));
        }
        w.iter().map(|x| x.rational(field)).collect()
    }

    pub fn matroid(&self, name: &str) -> Result<&MatroidOracle, CliError> {
        self.matroids
            .get(name)
            .ok_or_else(|| CliError::invalid("reference", format!("unknown matroid '{name}'")))
    }

    pub fn valuation(&self, name: &str) -> Result<&ValuationOracle, CliError> {
        self.valuations
            .get(name)
            .ok_or_else(|| CliError::invalid("reference", format!("unknown valuation '{name}'")))
    }

    pub fn function(&self, name: &str) -> Result<&MnatFunction, CliError> {
        self.functions
            .get(name)
            .ok_or_else(|| CliError::invalid("reference", format!("unknown function '{name}'")))
    }

    fn build_matroid(&self, spec: &MatroidSpec) -> Result<MatroidOracle, CliError> {
        let n = self.n();
        let m = match spec {
            MatroidSpec::Uniform { rank, .. } => make_uniform(n, *rank),
            MatroidSpec::Free { .. } => Ok(make_free(n)),
            MatroidSpec::Partition { blocks, .. } => {
                let blocks = blocks
                    .iter()
                    .map(|b| Ok((self.subset(&b.elements)?, b.capacity)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                make_partition(n, &blocks)
            }
            MatroidSpec::Graphic { vertices, edges, .. } => {
                if edges.len() != n {
                    return Err(CliError::invalid(
                        "edges",
                        format!("expected one edge per element ({n})"),
                    ));
                }
                make_graphic(*vertices, edges)
            }
            MatroidSpec::Linear { columns, .. } => {
                if columns.len() != n {
                    return Err(CliError::invalid(
                        "columns",
                        format!("expected one column per element ({n})"),
                    ));
                }
                let cols = columns
                    .iter()
                    .map(|c| c.iter().map(|x| x.rational("columns")).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                make_linear(&cols)
            }
            MatroidSpec::ExplicitBases { bases, .. } => {
                let bases = bases.iter().map(|b| self.subset(b)).collect::<Result<Vec<_>, _>>()?;
                ExplicitBaseFamily::new(n, bases).and_then(|f| make_from_bases(&f))
            }
        };
        m.map_err(CliError::from)
    }

    fn build_valuation(&self, spec: &ValuationSpec) -> Result<ValuationOracle, CliError> {
        let v = match spec {
            ValuationSpec::ModularOnMatroid { matroid, weights, .. } => {
                from_matroid_and_weights(self.matroid(matroid)?, &self.weights("weights", weights)?)
            }
            ValuationSpec::SizeConstrained { weights, rank, .. } => {
                size_constrained_modular(&self.weights("weights", weights)?, *rank)
            }
            ValuationSpec::DualOf { of, .. } => Ok(dual_valuation(self.valuation(of)?)),
            ValuationSpec::DisjointSum { of, .. } => {
                let parts = of
                    .iter()
                    .map(|o| self.valuation(o).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                disjoint_sum(&parts)
            }
            ValuationSpec::Indicator { bases, .. } => {
                let bases = bases.iter().map(|b| self.subset(b)).collect::<Result<Vec<_>, _>>()?;
                indicator(self.n(), &bases)
            }
            ValuationSpec::Table { entries, .. } => {
                let entries = entries
                    .iter()
                    .map(|e| Ok((self.subset(&e.set)?, e.value.rational("value")?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                from_table(self.n(), &entries)
            }
        };
        v.map_err(CliError::from)
    }

    fn build_function(&self, spec: &FunctionSpec) -> Result<MnatFunction, CliError> {
        let n = self.n();
        match spec {
            FunctionSpec::Laminar {
                lower,
                upper,
                members,
                rank,
                ..
            } => {
                let members = members
                    .iter()
                    .map(|m| {
                        let values = m
                            .values
                            .iter()
                            .map(|x| x.rational("values"))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok((self.subset(&m.elements)?, UnivariateTable::new(m.start, values)?))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let spec = LaminarSpec::new(members, lower.clone(), upper.clone())?;
                let f = laminar_convex_function(&spec)?;
                match rank {
                    None => Ok(f),
                    Some(r) => match restrict_to_hyperplane(&f, *r)? {
                        Restricted::Function(g) => Ok(g),
                        Restricted::Valuation(o) => {
                            // A 0/1 box restricts to a set function; wrap it back.
                            let n = o.ground_size();
                            MnatFunction::from_fn(vec![0; n], vec![1; n], o.witness_base().to_vector(), move |x| {
                                vector_to_subset(x).map_or(ExtValue::Infinite, |s| o.value(&s))
                            })
                            .map_err(CliError::from)
                        }
                    },
                }
            }
            FunctionSpec::MatroidIndicator { matroid, weights, .. } => {
                let m = self.matroid(matroid)?.clone();
                let w = self.weights("weights", weights)?;
                let base = m.some_base().to_vector();
                MnatFunction::from_fn(vec![0; n], vec![1; n], base, move |x| match vector_to_subset(x) {
                    Some(s) if m.is_base(&s) => ExtValue::Finite(modular_sum(&w, &s)),
                    _ => ExtValue::Infinite,
                })
                .map_err(CliError::from)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use valmat::primitives::ratio;

    fn model(text: &str) -> Result<Model, CliError> {
        Model::build(&InstanceFile::parse(text)?)
    }

    #[test]
    fn numbers_parse_exactly() {
        assert_eq!(Num::Text("-3/6".into()).rational("x").unwrap(), ratio(-1, 2));
        assert_eq!(Num::Int(4).ext("x").unwrap(), ExtValue::int(4));
        assert_eq!(Num::Text("inf".into()).ext("x").unwrap(), ExtValue::Infinite);
        assert!(Num::Text("inf".into()).rational("x").is_err());
        assert_eq!(Num::from_rational(&ratio(6, 4)), Num::Text("3/2".into()));
        assert_eq!(Num::from_rational(&ratio(6, 3)), Num::Int(2));
    }

    #[test]
    fn elements_resolve_by_label_or_index() {
        let m = model("[ground]\nlabels = [\"x\", \"y\", \"z\"]\n").unwrap();
        let s = m
            .subset(&[ElementRef::Label("z".into()), ElementRef::Index(0)])
            .unwrap();
        assert_eq!(m.labels_of(&s), vec!["x", "z"]);
        assert!(m.element(&ElementRef::Label("w".into())).is_err());
        assert!(m.element(&ElementRef::Index(3)).is_err());
        let plain = model("[ground]\nsize = 2\n").unwrap();
        assert_eq!(plain.element(&ElementRef::Label("1".into())).unwrap(), 1);
    }

    #[test]
    fn duplicate_and_dangling_names_are_rejected() {
        let dup = "[ground]\nsize = 2\n[[matroid]]\nname = \"m\"\nkind = \"free\"\n[[matroid]]\nname = \"m\"\nkind = \"free\"\n";
        assert!(matches!(model(dup), Err(CliError::Invalid { .. })));
        let dangling = "[ground]\nsize = 2\n[[valuation]]\nname = \"d\"\nkind = \"dual-of\"\nof = \"nothing\"\n";
        assert!(matches!(model(dangling), Err(CliError::Invalid { .. })));
        assert!(matches!(model("[ground]\n"), Err(CliError::Invalid { .. })));
        assert!(matches!(
            model("[ground]\nsize = 2\n[extra]\n"),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn instance_round_trips_through_toml() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/samples/sample.toml")).unwrap();
        let file = InstanceFile::parse(&text).unwrap();
        let again = InstanceFile::parse(&file.to_toml()).unwrap();
        assert_eq!(file.to_toml(), again.to_toml());
        let m = Model::build(&again).unwrap();
        assert_eq!(m.valuation("second").unwrap().rank(), 2);
    }
}
