use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    TypeInference,
    Lambda,
    InlineFunction,
    SafeCall,
    UnsafeCall,
    WhenExpr,
    FuncWithDefaultValue,
    FuncCallWithNamedArg,
    SmartCast,
    DataClass,
    RangeExpr,
    ExtensionFunction,
    StringTemplate,
    SuperDelegation,
    PropertyDelegation,
    OperatorOverloading,
    Singleton,
    CompanionObject,
    DestructuringDecl,
    InfixFunction,
    TailrecFunction,
    SealedClass,
    TypeAlias,
    Coroutine,
    Contract,
    InlineClass,
}

/// The population a feature's count is divided by when normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Denominator {
    VariableDeclarations,
    NamedFunctions,
    FunctionsAndConstructors,
    Classes,
    FunctionCalls,
    Strings,
    Properties,
    Inheritances,
    ObjectDeclarations,
    Lloc,
}

impl Denominator {
    pub fn name(self) -> &'static str {
        match self {
            Denominator::VariableDeclarations => "variable_declarations",
            Denominator::NamedFunctions => "named_functions",
            Denominator::FunctionsAndConstructors => "named_functions+constructors",
            Denominator::Classes => "classes",
            Denominator::FunctionCalls => "function_calls",
            Denominator::Strings => "strings",
            Denominator::Properties => "properties",
            Denominator::Inheritances => "inheritances",
            Denominator::ObjectDeclarations => "object_declarations",
            Denominator::Lloc => "lloc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown feature kind `{0}`")]
pub struct UnknownFeature(pub String);

impl FeatureKind {
    pub const ALL: [FeatureKind; 26] = [
        FeatureKind::TypeInference,
        FeatureKind::Lambda,
        FeatureKind::InlineFunction,
        FeatureKind::SafeCall,
        FeatureKind::UnsafeCall,
        FeatureKind::WhenExpr,
        FeatureKind::FuncWithDefaultValue,
        FeatureKind::FuncCallWithNamedArg,
        FeatureKind::SmartCast,
        FeatureKind::DataClass,
        FeatureKind::RangeExpr,
        FeatureKind::ExtensionFunction,
        FeatureKind::StringTemplate,
        FeatureKind::SuperDelegation,
        FeatureKind::PropertyDelegation,
        FeatureKind::OperatorOverloading,
        FeatureKind::Singleton,
        FeatureKind::CompanionObject,
        FeatureKind::DestructuringDecl,
        FeatureKind::InfixFunction,
        FeatureKind::TailrecFunction,
        FeatureKind::SealedClass,
        FeatureKind::TypeAlias,
        FeatureKind::Coroutine,
        FeatureKind::Contract,
        FeatureKind::InlineClass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::TypeInference => "TypeInference",
            FeatureKind::Lambda => "Lambda",
            FeatureKind::InlineFunction => "InlineFunction",
            FeatureKind::SafeCall => "SafeCall",
            FeatureKind::UnsafeCall => "UnsafeCall",
            FeatureKind::WhenExpr => "WhenExpr",
            FeatureKind::FuncWithDefaultValue => "FuncWithDefaultValue",
            FeatureKind::FuncCallWithNamedArg => "FuncCallWithNamedArg",
            FeatureKind::SmartCast => "SmartCast",
            FeatureKind::DataClass => "DataClass",
            FeatureKind::RangeExpr => "RangeExpr",
            FeatureKind::ExtensionFunction => "ExtensionFunction",
            FeatureKind::StringTemplate => "StringTemplate",
            FeatureKind::SuperDelegation => "SuperDelegation",
            FeatureKind::PropertyDelegation => "PropertyDelegation",
            FeatureKind::OperatorOverloading => "OperatorOverloading",
            FeatureKind::Singleton => "Singleton",
            FeatureKind::CompanionObject => "CompanionObject",
            FeatureKind::DestructuringDecl => "DestructuringDecl",
            FeatureKind::InfixFunction => "InfixFunction",
            FeatureKind::TailrecFunction => "TailrecFunction",
            FeatureKind::SealedClass => "SealedClass",
            FeatureKind::TypeAlias => "TypeAlias",
            FeatureKind::Coroutine => "Coroutine",
            FeatureKind::Contract => "Contract",
            FeatureKind::InlineClass => "InlineClass",
        }
    }

    /// Normalization population for this kind.
    pub fn denominator(self) -> Denominator {
        use FeatureKind as F;
        match self {
            F::TypeInference | F::DestructuringDecl => Denominator::VariableDeclarations,
            F::InlineFunction
            | F::ExtensionFunction
            | F::OperatorOverloading
            | F::InfixFunction
            | F::TailrecFunction => Denominator::NamedFunctions,
            F::FuncWithDefaultValue => Denominator::FunctionsAndConstructors,
            F::FuncCallWithNamedArg => Denominator::FunctionCalls,
            F::DataClass | F::SealedClass | F::InlineClass => Denominator::Classes,
            F::StringTemplate => Denominator::Strings,
            F::PropertyDelegation => Denominator::Properties,
            F::SuperDelegation => Denominator::Inheritances,
            F::Singleton | F::CompanionObject => Denominator::ObjectDeclarations,
            F::Lambda
            | F::SafeCall
            | F::UnsafeCall
            | F::WhenExpr
            | F::SmartCast
            | F::RangeExpr
            | F::TypeAlias
            | F::Coroutine
            | F::Contract => Denominator::Lloc,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = UnknownFeature;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownFeature(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in FeatureKind::ALL {
            assert_eq!(kind.name().parse::<FeatureKind>().unwrap(), kind);
        }
        assert!("Generics".parse::<FeatureKind>().is_err());
    }

    #[test]
    fn twenty_six_distinct_kinds() {
        let mut all = FeatureKind::ALL.to_vec();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 26);
    }
}
