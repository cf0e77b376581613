use crate::molgraph::{Element, MolecularGraph, Role};

/// Filters applied when pairing molecules.
#[derive(Debug, Clone, Default)]
pub struct PairConstraints {
    /// Largest allowed heavy-atom count for either molecule.
    pub max_heavy_atoms: Option<usize>,
    /// Keep only acyl halides with one of these leaving halogens.
    pub halogens: Option<Vec<Element>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub role: Role,
    pub index: usize,
    pub reason: String,
}

/// Accepted `(alcohol index, acyl halide index)` pairs, alcohol-major, and
/// the molecules that were filtered out.
#[derive(Debug, Clone, Default)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub rejected: Vec<Rejection>,
}

/// An alcohol needs at least one O–H and no acyl-halide group.
pub fn check_alcohol(g: &MolecularGraph) -> Result<(), String> {
    if g.hydroxyl_oxygens().is_empty() {
        return Err("alcohol has no O-H group".into());
    }
    if !g.acyl_halide_groups().is_empty() {
        return Err("alcohol contains an acyl halide group".into());
    }
    Ok(())
}

/// An acyl halide needs a C(=O)–X group (X ∈ {Cl, Br, I}) and no O–H.
pub fn check_acyl_halide(g: &MolecularGraph) -> Result<(), String> {
    if g.acyl_halide_groups().is_empty() {
        return Err("acyl halide has no C(=O)-X group".into());
    }
    if !g.hydroxyl_oxygens().is_empty() {
        return Err("acyl halide contains an O-H group".into());
    }
    Ok(())
}

/// Cartesian product of the valid alcohols and acyl halides.
pub fn enumerate_pairs(
    alcohols: &[MolecularGraph],
    halides: &[MolecularGraph],
    constraints: &PairConstraints,
) -> Pairing {
    let mut rejected = Vec::new();
    let size_ok = |g: &MolecularGraph| -> Result<(), String> {
        match constraints.max_heavy_atoms {
            Some(max) if g.heavy_atom_count() > max => {
                Err(format!("{} heavy atoms exceed limit {max}", g.heavy_atom_count()))
            }
            _ => Ok(()),
        }
    };

    let mut keep_alcohols = Vec::new();
    for (i, g) in alcohols.iter().enumerate() {
        match check_alcohol(g).and_then(|_| size_ok(g)) {
            Ok(()) => keep_alcohols.push(i),
            Err(reason) => rejected.push(Rejection {
                role: Role::Alcohol,
                index: i,
                reason,
            }),
        }
    }
    let mut keep_halides = Vec::new();
    for (j, g) in halides.iter().enumerate() {
        let halogen_ok = || match (&constraints.halogens, g.leaving_halogen()) {
            (Some(allowed), Some(x)) if !allowed.contains(&x) => Err(format!("halogen {x} not allowed")),
            _ => Ok(()),
        };
        match check_acyl_halide(g).and_then(|_| size_ok(g)).and_then(|_| halogen_ok()) {
            Ok(()) => keep_halides.push(j),
            Err(reason) => rejected.push(Rejection {
                role: Role::AcylHalide,
                index: j,
                reason,
            }),
        }
    }

    let pairs = keep_alcohols
        .iter()
        .flat_map(|&i| keep_halides.iter().map(move |&j| (i, j)))
        .collect();
    Pairing { pairs, rejected }
}
