//! The 26 feature detectors and the normalization denominators.

mod kinds;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::syntax::{count_lloc, NodeKind, SourceTree, SyntaxNode};

pub use kinds::{Denominator, FeatureKind, UnknownFeature};

pub const DEFAULT_COROUTINE_KEYWORDS: &[&str] =
    &["launch", "async", "runBlocking", "withContext", "coroutineScope", "delay"];
pub const DEFAULT_RANGE_INFIX: &[&str] = &["until", "downTo"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectConfig {
    pub enabled: Vec<FeatureKind>,
    pub coroutine_keywords: Vec<String>,
    /// Infix function names counted as range expressions besides `..` and `..<`.
    pub range_infix: Vec<String>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            enabled: FeatureKind::ALL.to_vec(),
            coroutine_keywords: DEFAULT_COROUTINE_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            range_infix: DEFAULT_RANGE_INFIX.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl DetectConfig {
    pub fn is_enabled(&self, kind: FeatureKind) -> bool {
        self.enabled.contains(&kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureInstance {
    pub kind: FeatureKind,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DenominatorCounts {
    pub variable_declarations: u64,
    pub named_functions: u64,
    pub constructors: u64,
    pub classes: u64,
    pub function_calls: u64,
    pub strings: u64,
    pub properties: u64,
    pub inheritances: u64,
    pub object_declarations: u64,
    pub lloc: u64,
}

impl DenominatorCounts {
    pub fn get(&self, which: Denominator) -> u64 {
        match which {
            Denominator::VariableDeclarations => self.variable_declarations,
            Denominator::NamedFunctions => self.named_functions,
            Denominator::FunctionsAndConstructors => self.named_functions + self.constructors,
            Denominator::Classes => self.classes,
            Denominator::FunctionCalls => self.function_calls,
            Denominator::Strings => self.strings,
            Denominator::Properties => self.properties,
            Denominator::Inheritances => self.inheritances,
            Denominator::ObjectDeclarations => self.object_declarations,
            Denominator::Lloc => self.lloc,
        }
    }

    pub fn add(&mut self, other: &DenominatorCounts) {
        self.variable_declarations += other.variable_declarations;
        self.named_functions += other.named_functions;
        self.constructors += other.constructors;
        self.classes += other.classes;
        self.function_calls += other.function_calls;
        self.strings += other.strings;
        self.properties += other.properties;
        self.inheritances += other.inheritances;
        self.object_declarations += other.object_declarations;
        self.lloc += other.lloc;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileFeatureReport {
    pub path: String,
    /// Sorted by line, then kind.
    pub instances: Vec<FeatureInstance>,
    pub denominators: DenominatorCounts,
}

impl FileFeatureReport {
    pub fn counts(&self) -> BTreeMap<FeatureKind, u64> {
        let mut counts = BTreeMap::new();
        for inst in &self.instances {
            *counts.entry(inst.kind).or_insert(0) += 1;
        }
        counts
    }

    pub fn count(&self, kind: FeatureKind) -> u64 {
        self.instances.iter().filter(|i| i.kind == kind).count() as u64
    }
}

pub fn detect(tree: &SourceTree, config: &DetectConfig) -> FileFeatureReport {
    let mut walker = Walker { config, instances: Vec::new(), den: DenominatorCounts::default(), guards: Vec::new() };
    walker.visit(&tree.root, false);
    walker.den.lloc = count_lloc(tree) as u64;
    let mut instances: Vec<FeatureInstance> =
        walker.instances.into_iter().filter(|i| config.is_enabled(i.kind)).collect();
    instances.sort();
    FileFeatureReport { path: tree.path.clone(), instances, denominators: walker.den }
}

struct Walker<'c> {
    config: &'c DetectConfig,
    instances: Vec<FeatureInstance>,
    den: DenominatorCounts,
    /// Identifiers currently known to have passed an `is` check.
    guards: Vec<String>,
}

impl Walker<'_> {
    fn emit(&mut self, kind: FeatureKind, line: u32) {
        self.instances.push(FeatureInstance { kind, line });
    }

    fn visit(&mut self, node: &SyntaxNode, in_function: bool) {
        use FeatureKind as F;
        let line = node.span.start_line;
        let a = &node.attrs;
        match node.kind {
            NodeKind::ClassDecl => {
                self.den.classes += 1;
                if node.has_modifier("data") {
                    self.emit(F::DataClass, line);
                }
                if node.has_modifier("sealed") {
                    self.emit(F::SealedClass, line);
                }
                if node.has_modifier("inline") || node.has_modifier("value") {
                    self.emit(F::InlineClass, line);
                }
            }
            NodeKind::ObjectDecl => {
                self.den.object_declarations += 1;
                if !a.literal {
                    self.emit(F::Singleton, line);
                }
            }
            NodeKind::CompanionObjectDecl => {
                self.den.object_declarations += 1;
                self.emit(F::CompanionObject, line);
            }
            NodeKind::FunctionDecl => {
                if node.has_modifier("suspend") {
                    self.emit(F::Coroutine, line);
                }
                if a.name.is_some() {
                    self.den.named_functions += 1;
                    if a.default_params > 0 {
                        self.emit(F::FuncWithDefaultValue, line);
                    }
                    if a.receiver_type.is_some() {
                        self.emit(F::ExtensionFunction, line);
                    }
                    for (modifier, kind) in [
                        ("inline", F::InlineFunction),
                        ("operator", F::OperatorOverloading),
                        ("infix", F::InfixFunction),
                        ("tailrec", F::TailrecFunction),
                    ] {
                        if node.has_modifier(modifier) {
                            self.emit(kind, line);
                        }
                    }
                }
            }
            NodeKind::ConstructorDecl => {
                self.den.constructors += 1;
                if a.default_params > 0 {
                    self.emit(F::FuncWithDefaultValue, line);
                }
            }
            NodeKind::PropertyDecl => self.den.properties += 1,
            NodeKind::VariableDecl => {
                self.den.variable_declarations += 1;
                if !a.local || a.delegated {
                    self.den.properties += 1;
                }
                if a.delegated {
                    self.emit(F::PropertyDelegation, line);
                } else if a.has_initializer && !a.has_type_annotation {
                    self.emit(F::TypeInference, line);
                }
            }
            NodeKind::DestructuringDecl => {
                self.den.variable_declarations += u64::from(a.components.max(1));
                self.emit(F::DestructuringDecl, line);
            }
            NodeKind::LambdaExpr => {
                self.emit(F::Lambda, line);
                if node.has_modifier("suspend") {
                    self.emit(F::Coroutine, line);
                }
            }
            NodeKind::CallExpr => {
                self.den.function_calls += 1;
                let name = a.name.as_deref().unwrap_or("");
                if self.config.coroutine_keywords.iter().any(|k| k == name) {
                    self.emit(F::Coroutine, line);
                }
                let args: Vec<&SyntaxNode> =
                    node.children.iter().filter(|c| c.kind == NodeKind::CallArgument).collect();
                if args.iter().any(|c| c.attrs.named) {
                    self.emit(F::FuncCallWithNamedArg, line);
                }
                if name == "contract" && in_function && args.len() == 1 && is_lambda_argument(args[0]) {
                    self.emit(F::Contract, line);
                }
            }
            NodeKind::BinaryOp => match a.operator.as_deref() {
                Some("?.") => {
                    self.emit(F::SafeCall, line);
                    self.smart_cast_use(node);
                }
                Some(".") => self.smart_cast_use(node),
                Some(".." | "..<") => self.emit(F::RangeExpr, line),
                Some(op) if self.config.range_infix.iter().any(|r| r == op) => self.emit(F::RangeExpr, line),
                _ => {}
            },
            NodeKind::UnaryPostfixOp => self.emit(F::UnsafeCall, line),
            NodeKind::WhenExpr => self.emit(F::WhenExpr, line),
            NodeKind::StringLiteral => {
                self.den.strings += 1;
                if node.children.iter().any(|c| c.kind == NodeKind::StringTemplateEntry) {
                    self.emit(F::StringTemplate, line);
                }
            }
            NodeKind::TypeAliasDecl => self.emit(F::TypeAlias, line),
            NodeKind::SuperTypeEntry => {
                self.den.inheritances += 1;
                if a.delegated {
                    self.emit(F::SuperDelegation, line);
                }
            }
            NodeKind::File
            | NodeKind::CallArgument
            | NodeKind::StringTemplateEntry
            | NodeKind::Modifier
            | NodeKind::Block
            | NodeKind::Other => {}
        }

        let pushed = node.attrs.guards.len();
        self.guards.extend(node.attrs.guards.iter().cloned());
        let child_in_function = in_function || node.kind == NodeKind::FunctionDecl;
        for child in &node.children {
            self.visit(child, child_in_function);
        }
        self.guards.truncate(self.guards.len() - pushed);
    }

    fn smart_cast_use(&mut self, node: &SyntaxNode) {
        if let Some(name) = &node.attrs.name {
            if self.guards.iter().any(|g| g == name) {
                self.emit(FeatureKind::SmartCast, node.span.start_line);
            }
        }
    }
}

fn is_lambda_argument(arg: &SyntaxNode) -> bool {
    matches!(arg.children.as_slice(), [only] if only.kind == NodeKind::LambdaExpr)
}
