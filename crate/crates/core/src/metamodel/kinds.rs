//! Object kinds and the kind-inheritance lattice.

use std::fmt;

/// The kinds an architecture object can have.
///
/// The four abstract kinds (`DataStorage`, `MemoryInterface`, `CacheInterface`,
/// `AcadlObject`) exist only so edge rules can be written against a base kind;
/// they can never be instantiated in a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectKind {
    PipelineStage,
    ExecuteStage,
    InstructionFetchStage,
    FunctionalUnit,
    MemoryAccessUnit,
    InstructionMemoryAccessUnit,
    RegisterFile,
    Sram,
    Dram,
    SetAssociativeCache,
    // Abstract kinds, usable in rules only.
    DataStorage,
    MemoryInterface,
    CacheInterface,
    AcadlObject,
}

impl ObjectKind {
    pub const CONCRETE: [ObjectKind; 10] = [
        ObjectKind::PipelineStage,
        ObjectKind::ExecuteStage,
        ObjectKind::InstructionFetchStage,
        ObjectKind::FunctionalUnit,
        ObjectKind::MemoryAccessUnit,
        ObjectKind::InstructionMemoryAccessUnit,
        ObjectKind::RegisterFile,
        ObjectKind::Sram,
        ObjectKind::Dram,
        ObjectKind::SetAssociativeCache,
    ];

    pub fn is_concrete(self) -> bool {
        !matches!(
            self,
            ObjectKind::DataStorage
                | ObjectKind::MemoryInterface
                | ObjectKind::CacheInterface
                | ObjectKind::AcadlObject
        )
    }

    /// Direct base kind, or `None` for the root.
    pub fn parent(self) -> Option<ObjectKind> {
        use ObjectKind::*;
        match self {
            AcadlObject => None,
            PipelineStage | FunctionalUnit | RegisterFile | DataStorage => Some(AcadlObject),
            ExecuteStage => Some(PipelineStage),
            InstructionFetchStage => Some(ExecuteStage),
            MemoryAccessUnit => Some(FunctionalUnit),
            InstructionMemoryAccessUnit => Some(MemoryAccessUnit),
            MemoryInterface | CacheInterface => Some(DataStorage),
            Sram | Dram => Some(MemoryInterface),
            SetAssociativeCache => Some(CacheInterface),
        }
    }

    /// True when `self` equals `base` or inherits from it (transitively).
    pub fn is_a(self, base: ObjectKind) -> bool {
        let mut cur = Some(self);
        while let Some(k) = cur {
            if k == base {
                return true;
            }
            cur = k.parent();
        }
        false
    }

    pub fn is_stage(self) -> bool {
        self.is_a(ObjectKind::PipelineStage)
    }

    pub fn is_unit(self) -> bool {
        self.is_a(ObjectKind::FunctionalUnit)
    }

    pub fn is_storage(self) -> bool {
        self.is_a(ObjectKind::DataStorage)
    }

    pub fn name(self) -> &'static str {
        use ObjectKind::*;
        match self {
            PipelineStage => "PipelineStage",
            ExecuteStage => "ExecuteStage",
            InstructionFetchStage => "InstructionFetchStage",
            FunctionalUnit => "FunctionalUnit",
            MemoryAccessUnit => "MemoryAccessUnit",
            InstructionMemoryAccessUnit => "InstructionMemoryAccessUnit",
            RegisterFile => "RegisterFile",
            Sram => "SRAM",
            Dram => "DRAM",
            SetAssociativeCache => "SetAssociativeCache",
            DataStorage => "DataStorage",
            MemoryInterface => "MemoryInterface",
            CacheInterface => "CacheInterface",
            AcadlObject => "ACADLObject",
        }
    }

    pub fn parse(s: &str) -> Option<ObjectKind> {
        use ObjectKind::*;
        Some(match s {
            "PipelineStage" => PipelineStage,
            "ExecuteStage" => ExecuteStage,
            "InstructionFetchStage" => InstructionFetchStage,
            "FunctionalUnit" => FunctionalUnit,
            "MemoryAccessUnit" => MemoryAccessUnit,
            "InstructionMemoryAccessUnit" => InstructionMemoryAccessUnit,
            "RegisterFile" => RegisterFile,
            "SRAM" => Sram,
            "DRAM" => Dram,
            "SetAssociativeCache" => SetAssociativeCache,
            "DataStorage" => DataStorage,
            "MemoryInterface" => MemoryInterface,
            "CacheInterface" => CacheInterface,
            "ACADLObject" => AcadlObject,
            _ => return None,
        })
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Edge types between architecture objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeType {
    Contains,
    Forward,
    ReadData,
    WriteData,
}

impl EdgeType {
    pub const ALL: [EdgeType; 4] = [
        EdgeType::Contains,
        EdgeType::Forward,
        EdgeType::ReadData,
        EdgeType::WriteData,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeType::Contains => "CONTAINS",
            EdgeType::Forward => "FORWARD",
            EdgeType::ReadData => "READ_DATA",
            EdgeType::WriteData => "WRITE_DATA",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeType> {
        Some(match s {
            "CONTAINS" => EdgeType::Contains,
            "FORWARD" => EdgeType::Forward,
            "READ_DATA" => EdgeType::ReadData,
            "WRITE_DATA" => EdgeType::WriteData,
            _ => return None,
        })
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Edge validity per the metamodel's association table.
///
/// A rule written against an abstract kind admits every concrete descendant.
/// The one carve-out: only an InstructionFetchStage may contain an
/// InstructionMemoryAccessUnit, even though the generic
/// ExecuteStage-contains-FunctionalUnit rule would otherwise admit it.
pub fn validate_edge(source: ObjectKind, edge_type: EdgeType, target: ObjectKind) -> bool {
    use EdgeType::*;
    use ObjectKind::*;
    match edge_type {
        Forward => source.is_stage() && target.is_stage(),
        Contains => {
            if !(source.is_a(ExecuteStage) && target.is_unit()) {
                return false;
            }
            if target.is_a(InstructionMemoryAccessUnit) {
                source.is_a(InstructionFetchStage)
            } else {
                true
            }
        }
        ReadData => {
            (source.is_a(RegisterFile) && target.is_unit())
                || (source.is_storage() && target.is_a(MemoryAccessUnit))
                || (source.is_storage() && target.is_storage())
        }
        WriteData => {
            (source.is_unit() && target.is_a(RegisterFile))
                || (source.is_a(MemoryAccessUnit) && target.is_storage())
                || (source.is_storage() && target.is_storage())
        }
    }
}
