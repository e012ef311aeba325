//! Young walls and truncated walls, the latter also in synchronized pairs.
//!
//! A wall is stored column by column (column 0 is the rightmost one). Every
//! column follows the same stack of cells. A cell holds a unit cube or two
//! half blocks, split either by height or by thickness (front and back).
//! A column state records how many cells are complete and which atom of the
//! next cell, if any, is present.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::affine_data::{AffineType, Family, HalfInt};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundKind {
    Level1,
    Supporting,
    Covering,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ground {
    pub kind: GroundKind,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partial {
    None,
    Lower,
    Front,
    Back,
}

/// Occupancy of one column: `cells` complete cells plus one optional atom of
/// the next cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    pub cells: u32,
    pub partial: Partial,
}

impl Column {
    pub const fn new(cells: u32, partial: Partial) -> Self {
        Column { cells, partial }
    }

    /// Atom-level inclusion for two columns sharing the same cell geometry.
    pub fn within(self, other: Column) -> bool {
        use std::cmp::Ordering::*;
        match self.cells.cmp(&other.cells) {
            Less => true,
            Greater => false,
            Equal => self.partial == Partial::None || self.partial == other.partial,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Unit(usize),
    HalfHeight(usize),
    Split { front: usize, back: usize },
}

impl CellKind {
    fn size(self) -> u32 {
        match self {
            CellKind::Unit(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    UnitCube,
    HalfThickBack,
    HalfThickFront,
    HalfHeightLower,
    HalfHeightUpper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: usize,
    pub kind: PieceKind,
    /// Bottom of the piece's cell.
    pub base_level: HalfInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Add,
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Multiplicity {
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Host {
    Young,
    Supporting,
    Covering,
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteTarget {
    Slot,
    Block,
    Pair,
}

/// A place where a block (or a `k`-pair of blocks) can be added or removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub host: Host,
    pub action: Action,
    pub multiplicity: Multiplicity,
    pub color: usize,
    pub column: usize,
    /// Bottom level of the cell holding the site.
    pub level: i64,
    /// Argument fed to the shift table: the cell level, or the level plus
    /// one half for the colors `2` and `n` of a half-thickness cell.
    pub shift_arg: HalfInt,
    pub piece: PieceKind,
    pub before: Column,
    pub after: Column,
}

impl Site {
    pub fn target(&self) -> SiteTarget {
        match (self.host, self.action) {
            (Host::Pair, _) => SiteTarget::Pair,
            (_, Action::Add) => SiteTarget::Slot,
            (_, Action::Remove) => SiteTarget::Block,
        }
    }

    /// `(-i, l)` in the drawing coordinates.
    pub fn position(&self) -> (i64, i64) {
        (-(self.column as i64), self.level)
    }

    pub fn weight(&self) -> i64 {
        match self.multiplicity {
            Multiplicity::Single => 1,
            Multiplicity::Double => 2,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match (self.target(), self.action) {
            (SiteTarget::Pair, Action::Add) => "admissible pair",
            (SiteTarget::Pair, Action::Remove) => "removable pair",
            (SiteTarget::Slot, _) => "admissible slot",
            (SiteTarget::Block, _) => "removable block",
        };
        let mult = match self.multiplicity {
            Multiplicity::Double => "double ",
            Multiplicity::Single => "",
        };
        let (x, y) = self.position();
        write!(f, "{mult}{}-{what} at ({x},{y})", self.color)?;
        match self.host {
            Host::Supporting => write!(f, " [supporting]"),
            Host::Covering => write!(f, " [covering]"),
            _ => Ok(()),
        }
    }
}

/// A Young wall (level-1 ground) or a truncated wall.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wall {
    ty: AffineType,
    ground: Ground,
    base: i64,
    cols: Vec<Column>,
}

impl Wall {
    pub fn ground_state(ty: AffineType, ground: Ground) -> Result<Self> {
        ty.check_index(ground.k)?;
        if matches!(ty.family(), Family::A2even) {
            return Err(Error::UnsupportedWallType(ty));
        }
        let class = ty.index_class(ground.k)?;
        let want = if ground.kind == GroundKind::Level1 { 1 } else { 2 };
        if class != want {
            return Err(Error::ClassMismatch { ty, k: ground.k, class });
        }
        let th = ty.thresholds(ground.k)?;
        let base = match ground.kind {
            GroundKind::Level1 => th.t.expect("class-1 index"),
            GroundKind::Supporting => th.tbar.floor(),
            GroundKind::Covering => th.tbarbar.floor(),
        };
        Ok(Wall {
            ty,
            ground,
            base,
            cols: Vec::new(),
        })
    }

    pub fn from_columns(ty: AffineType, ground: Ground, cols: Vec<Column>) -> Result<Self> {
        let mut w = Wall::ground_state(ty, ground)?;
        w.cols = cols;
        w.normalize();
        w.check_structure()?;
        Ok(w)
    }

    pub fn wall_type(&self) -> AffineType {
        self.ty
    }

    pub fn ground(&self) -> Ground {
        self.ground
    }

    pub fn columns(&self) -> &[Column] {
        &self.cols
    }

    pub fn is_truncated(&self) -> bool {
        self.ground.kind != GroundKind::Level1
    }

    pub fn host(&self) -> Host {
        match self.ground.kind {
            GroundKind::Level1 => Host::Young,
            GroundKind::Supporting => Host::Supporting,
            GroundKind::Covering => Host::Covering,
        }
    }

    /// Level of cell 0.
    pub fn base_level(&self) -> i64 {
        self.base
    }

    pub fn level_of(&self, m: u32) -> i64 {
        self.base_level() + m as i64
    }

    fn is_a1(&self) -> bool {
        self.ty.family() == Family::A1
    }

    /// State of every column not stored explicitly.
    pub fn ground_column(&self) -> Column {
        if self.is_a1() {
            return Column::new(0, Partial::None);
        }
        match self.cell_kind(0, 0) {
            CellKind::Split { .. } => Column::new(0, Partial::Back),
            _ => Column::new(0, Partial::Lower),
        }
    }

    pub fn column(&self, c: usize) -> Column {
        self.cols.get(c).copied().unwrap_or_else(|| self.ground_column())
    }

    fn normalize(&mut self) {
        let g = self.ground_column();
        while self.cols.last() == Some(&g) {
            self.cols.pop();
        }
    }

    fn with_column(&self, c: usize, col: Column) -> Wall {
        let mut w = self.clone();
        let g = w.ground_column();
        if w.cols.len() <= c {
            w.cols.resize(c + 1, g);
        }
        w.cols[c] = col;
        w.normalize();
        w
    }

    fn is_hh_color(&self, t: usize) -> bool {
        let n = self.ty.n();
        match self.ty.active_numbering() {
            Family::A2evenDagger => t == 1,
            Family::D2 => t == 1 || t == n,
            Family::B1 => t == n,
            _ => false,
        }
    }

    /// Front color of the half-thickness cell holding `a in {1, n-1}` in
    /// column `c`.
    fn front_color(&self, c: usize, a: usize) -> usize {
        let n = self.ty.n();
        let odd = c.is_multiple_of(2);
        let pick = |x: usize, y: usize| if odd { x } else { y };
        let k = self.ground.k;
        let low_pair = a == 1;
        match (self.ground.kind, low_pair) {
            (GroundKind::Level1, true) => {
                if k == 1 || k == 2 {
                    pick(k, 3 - k)
                } else {
                    pick(2, 1)
                }
            }
            (GroundKind::Level1, false) => {
                if k == n - 1 || k == n {
                    pick(k, 2 * n - 1 - k)
                } else {
                    pick(n, n - 1)
                }
            }
            (_, true) => pick(2, 1),
            (_, false) => pick(n, n - 1),
        }
    }

    /// Kind and colors of cell `m` in column `c`.
    pub fn cell_kind(&self, c: usize, m: u32) -> CellKind {
        let lvl = self.level_of(m);
        let x = self.ty;
        if self.is_a1() {
            let col = x
                .periodic_map(HalfInt::from_int(lvl - c as i64))
                .expect("A1 map is total");
            return CellKind::Unit(col);
        }
        if self.is_truncated() && m == 0 {
            return CellKind::HalfHeight(self.ground.k);
        }
        let l = HalfInt::from_int(lvl);
        let a = x.periodic_map(l).expect("cell levels lie in the domain");
        if x.in_domain(l.add_half()) {
            let front = self.front_color(c, a);
            let b = x.periodic_map(l.add_half()).expect("checked");
            let back = if front == a { b } else { a };
            return CellKind::Split { front, back };
        }
        if self.is_hh_color(a) {
            CellKind::HalfHeight(a)
        } else {
            CellKind::Unit(a)
        }
    }

    /// Atoms in a column state, ground atoms included.
    fn raw_atoms(&self, c: usize, col: Column) -> u32 {
        let full: u32 = (0..col.cells).map(|m| self.cell_kind(c, m).size()).sum();
        full + (col.partial != Partial::None) as u32
    }

    pub fn atoms_in_column(&self, c: usize) -> u32 {
        let g = self.ground_column();
        self.raw_atoms(c, self.column(c)) - self.raw_atoms(c, g)
    }

    /// Number of atoms above the ground state.
    pub fn atom_count(&self) -> u32 {
        (0..self.cols.len()).map(|c| self.atoms_in_column(c)).sum()
    }

    fn partial_allowed(&self, c: usize, col: Column) -> bool {
        matches!(
            (col.partial, self.cell_kind(c, col.cells)),
            (Partial::None, _)
                | (Partial::Lower, CellKind::HalfHeight(_))
                | (Partial::Front | Partial::Back, CellKind::Split { .. })
        )
    }

    fn check_structure(&self) -> Result<()> {
        let g = self.ground_column();
        for (c, &col) in self.cols.iter().enumerate() {
            if !self.partial_allowed(c, col) {
                return Err(Error::Malformed(format!("column {c}: {col:?}")));
            }
            if !g.within(col) {
                return Err(Error::Malformed(format!("column {c} lies below the ground")));
            }
            if c > 0 && !col.within(self.column(c - 1)) {
                return Err(Error::Malformed(format!("free space right of column {c}")));
            }
        }
        Ok(())
    }

    fn is_full(&self, col: Column) -> bool {
        col.partial == Partial::None && col != self.ground_column()
    }

    pub fn is_proper(&self) -> bool {
        if self.is_a1() {
            return true;
        }
        let mut seen = BTreeSet::new();
        self.cols
            .iter()
            .filter(|c| self.is_full(**c))
            .all(|c| seen.insert(c.cells))
    }

    /// Containment with both neighbours of column `c`, plus properness.
    fn locally_valid(&self, c: usize) -> bool {
        let col = self.column(c);
        if c > 0 && !col.within(self.column(c - 1)) {
            return false;
        }
        if !self.column(c + 1).within(col) {
            return false;
        }
        self.is_proper()
    }

    /// Every state change of one column by one atom, or by a pair of
    /// half-height atoms, that keeps the wall proper.
    pub fn moves(&self) -> Vec<Site> {
        let mut out = Vec::new();
        let g = self.ground_column();
        for c in 0..=self.cols.len() {
            let col = self.column(c);
            let m = col.cells;
            let mut push = |w: &Wall, action, mult, color, level_m: u32, piece, after: Column, arg: HalfInt| {
                let trial = w.with_column(c, after);
                if trial.locally_valid(c) {
                    out.push(Site {
                        host: w.host(),
                        action,
                        multiplicity: mult,
                        color,
                        column: c,
                        level: w.level_of(level_m),
                        shift_arg: arg,
                        piece,
                        before: col,
                        after,
                    });
                }
            };
            let lv = |m: u32| HalfInt::from_int(self.level_of(m));
            let truncated_base = |m: u32| self.is_truncated() && m == 0;
            // additions
            match col.partial {
                Partial::None => match self.cell_kind(c, m) {
                    CellKind::Unit(t) => push(
                        self,
                        Action::Add,
                        Multiplicity::Single,
                        t,
                        m,
                        PieceKind::UnitCube,
                        Column::new(m + 1, Partial::None),
                        lv(m),
                    ),
                    CellKind::HalfHeight(t) => {
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Double,
                            t,
                            m,
                            PieceKind::HalfHeightLower,
                            Column::new(m + 1, Partial::None),
                            lv(m),
                        );
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Single,
                            t,
                            m,
                            PieceKind::HalfHeightLower,
                            Column::new(m, Partial::Lower),
                            lv(m),
                        );
                    }
                    CellKind::Split { front, back } => {
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Single,
                            front,
                            m,
                            PieceKind::HalfThickFront,
                            Column::new(m, Partial::Front),
                            self.split_arg(m, front),
                        );
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Single,
                            back,
                            m,
                            PieceKind::HalfThickBack,
                            Column::new(m, Partial::Back),
                            self.split_arg(m, back),
                        );
                    }
                },
                Partial::Lower => {
                    if !truncated_base(m) {
                        let t = match self.cell_kind(c, m) {
                            CellKind::HalfHeight(t) => t,
                            _ => unreachable!("lower half only in half-height cells"),
                        };
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Single,
                            t,
                            m,
                            PieceKind::HalfHeightUpper,
                            Column::new(m + 1, Partial::None),
                            lv(m),
                        );
                    }
                }
                Partial::Front | Partial::Back => {
                    if let CellKind::Split { front, back } = self.cell_kind(c, m) {
                        let (t, piece) = if col.partial == Partial::Front {
                            (back, PieceKind::HalfThickBack)
                        } else {
                            (front, PieceKind::HalfThickFront)
                        };
                        push(
                            self,
                            Action::Add,
                            Multiplicity::Single,
                            t,
                            m,
                            piece,
                            Column::new(m + 1, Partial::None),
                            self.split_arg(m, t),
                        );
                    }
                }
            }
            // removals
            if col == g {
                continue;
            }
            match col.partial {
                Partial::Lower | Partial::Front | Partial::Back => {
                    let is_ground = m == 0 && col.partial == g.partial && g.cells == 0;
                    if !is_ground {
                        let (t, piece, arg) = match (col.partial, self.cell_kind(c, m)) {
                            (Partial::Lower, CellKind::HalfHeight(t)) => (t, PieceKind::HalfHeightLower, lv(m)),
                            (Partial::Front, CellKind::Split { front, .. }) => {
                                (front, PieceKind::HalfThickFront, self.split_arg(m, front))
                            }
                            (Partial::Back, CellKind::Split { back, .. }) => {
                                (back, PieceKind::HalfThickBack, self.split_arg(m, back))
                            }
                            _ => unreachable!("partial atom matches its cell"),
                        };
                        push(
                            self,
                            Action::Remove,
                            Multiplicity::Single,
                            t,
                            m,
                            piece,
                            Column::new(m, Partial::None),
                            arg,
                        );
                    }
                }
                Partial::None => {
                    let top = m - 1;
                    match self.cell_kind(c, top) {
                        CellKind::Unit(t) => push(
                            self,
                            Action::Remove,
                            Multiplicity::Single,
                            t,
                            top,
                            PieceKind::UnitCube,
                            Column::new(top, Partial::None),
                            lv(top),
                        ),
                        CellKind::HalfHeight(t) => {
                            let base_has_ground = top == 0 && g.partial == Partial::Lower && !self.is_a1();
                            if truncated_base(top) {
                                continue;
                            }
                            if !base_has_ground {
                                push(
                                    self,
                                    Action::Remove,
                                    Multiplicity::Double,
                                    t,
                                    top,
                                    PieceKind::HalfHeightUpper,
                                    Column::new(top, Partial::None),
                                    lv(top),
                                );
                            }
                            push(
                                self,
                                Action::Remove,
                                Multiplicity::Single,
                                t,
                                top,
                                PieceKind::HalfHeightUpper,
                                Column::new(top, Partial::Lower),
                                lv(top),
                            );
                        }
                        CellKind::Split { front, back } => {
                            push(
                                self,
                                Action::Remove,
                                Multiplicity::Single,
                                front,
                                top,
                                PieceKind::HalfThickFront,
                                Column::new(top, Partial::Back),
                                self.split_arg(top, front),
                            );
                            let base_has_ground = top == 0 && g.partial == Partial::Back;
                            if !base_has_ground {
                                push(
                                    self,
                                    Action::Remove,
                                    Multiplicity::Single,
                                    back,
                                    top,
                                    PieceKind::HalfThickBack,
                                    Column::new(top, Partial::Front),
                                    self.split_arg(top, back),
                                );
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn split_arg(&self, m: u32, t: usize) -> HalfInt {
        let l = HalfInt::from_int(self.level_of(m));
        let n = self.ty.n();
        if t == 2 || t == n {
            l.add_half()
        } else {
            l
        }
    }

    /// Admissible slots and removable blocks with the double/single
    /// classification: a two-block move that keeps the wall proper makes the
    /// place double, and only otherwise is the one-block move reported.
    pub fn sites(&self) -> Result<Vec<Site>> {
        if !self.is_proper() {
            return Err(Error::NotProper);
        }
        Ok(classify(self.moves()))
    }

    pub fn apply(&self, site: &Site) -> Result<Wall> {
        if site.host == Host::Pair || site.host != self.host() {
            return Err(Error::HostMismatch);
        }
        if self.column(site.column) != site.before || !self.moves().contains(site) {
            return Err(Error::SiteNotPresent);
        }
        let w = self.with_column(site.column, site.after);
        if !w.is_proper() {
            return Err(Error::ResultImproper);
        }
        Ok(w)
    }

    /// Pieces present in column `c`, bottom up, ground atoms included.
    pub fn pieces(&self, c: usize) -> Vec<Piece> {
        let col = self.column(c);
        let mut out = Vec::new();
        for m in 0..=col.cells {
            let base_level = HalfInt::from_int(self.level_of(m));
            let kind = self.cell_kind(c, m);
            let complete = m < col.cells;
            if !complete && col.partial == Partial::None {
                break;
            }
            let mut put = |color, kind| {
                out.push(Piece {
                    color,
                    kind,
                    base_level,
                })
            };
            match kind {
                CellKind::Unit(t) => put(t, PieceKind::UnitCube),
                CellKind::HalfHeight(t) => {
                    put(t, PieceKind::HalfHeightLower);
                    if complete {
                        put(t, PieceKind::HalfHeightUpper);
                    }
                }
                CellKind::Split { front, back } => {
                    if complete || col.partial == Partial::Back {
                        put(back, PieceKind::HalfThickBack);
                    }
                    if complete || col.partial == Partial::Front {
                        put(front, PieceKind::HalfThickFront);
                    }
                }
            }
        }
        out
    }

    /// The first `cells` cells of the stacking pattern of column `c`.
    pub fn column_pattern(&self, c: usize, cells: u32) -> Vec<Piece> {
        let mut out = Vec::new();
        for m in 0..cells {
            let base_level = HalfInt::from_int(self.level_of(m));
            let mut put = |color, kind| {
                out.push(Piece {
                    color,
                    kind,
                    base_level,
                })
            };
            match self.cell_kind(c, m) {
                CellKind::Unit(t) => put(t, PieceKind::UnitCube),
                CellKind::HalfHeight(t) => {
                    put(t, PieceKind::HalfHeightLower);
                    put(t, PieceKind::HalfHeightUpper);
                }
                CellKind::Split { front, back } => {
                    put(back, PieceKind::HalfThickBack);
                    put(front, PieceKind::HalfThickFront);
                }
            }
        }
        out
    }

    /// All column states of column `c` lying between the ground and `cap`,
    /// with at most `budget` atoms above the ground.
    fn column_states(&self, c: usize, cap: Option<Column>, budget: u32) -> Vec<(Column, u32)> {
        let g = self.ground_column();
        let g_atoms = self.raw_atoms(c, g);
        let mut out = Vec::new();
        let mut m = 0;
        loop {
            let kind = self.cell_kind(c, m);
            let parts: &[Partial] = match kind {
                CellKind::Unit(_) => &[Partial::None],
                CellKind::HalfHeight(_) => &[Partial::None, Partial::Lower],
                CellKind::Split { .. } => &[Partial::None, Partial::Front, Partial::Back],
            };
            let mut any_in_budget = false;
            for &p in parts {
                let col = Column::new(m, p);
                if !g.within(col) {
                    continue;
                }
                if let Some(cap) = cap {
                    if !col.within(cap) {
                        continue;
                    }
                }
                let a = self.raw_atoms(c, col) - g_atoms;
                if a <= budget {
                    any_in_budget = true;
                    out.push((col, a));
                }
            }
            if !any_in_budget && self.raw_atoms(c, Column::new(m, Partial::None)) > g_atoms + budget {
                break;
            }
            if let Some(cap) = cap {
                if m >= cap.cells {
                    break;
                }
            }
            m += 1;
        }
        out
    }

    /// All walls over this ground with at most `max_atoms` atoms and no
    /// free space; properness is not checked.
    fn enumerate_structural(&self, max_atoms: u32) -> Vec<Wall> {
        let base = Wall {
            cols: Vec::new(),
            ..self.clone()
        };
        let g = base.ground_column();
        let mut out = Vec::new();
        let mut stack = vec![(Vec::<Column>::new(), max_atoms)];
        while let Some((cols, budget)) = stack.pop() {
            let c = cols.len();
            let cap = cols.last().copied();
            let mut w = base.clone();
            w.cols = cols.clone();
            w.normalize();
            out.push(w);
            for (col, a) in base.column_states(c, cap, budget) {
                if col == g {
                    continue;
                }
                let mut next = cols.clone();
                next.push(col);
                stack.push((next, budget - a));
            }
        }
        out
    }
}

fn classify(moves: Vec<Site>) -> Vec<Site> {
    let doubles: BTreeSet<(Host, Action, usize)> = moves
        .iter()
        .filter(|s| s.multiplicity == Multiplicity::Double)
        .map(|s| (s.host, s.action, s.column))
        .collect();
    moves
        .into_iter()
        .filter(|s| {
            let shadowed = s.multiplicity == Multiplicity::Single
                && doubles.contains(&(s.host, s.action, s.column))
                && matches!(s.piece, PieceKind::HalfHeightLower | PieceKind::HalfHeightUpper);
            !shadowed
        })
        .collect()
}

/// Per-side data of a pair: the synchronization key and the columns where a
/// joint base block may be added or removed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideSignature {
    pub len: usize,
    pub open: BTreeSet<usize>,
    pub add: BTreeSet<usize>,
    pub remove: BTreeSet<usize>,
}

impl SideSignature {
    pub fn sync_key(&self) -> (usize, &BTreeSet<usize>) {
        (self.len, &self.open)
    }
}

/// Supporting and covering truncated walls over the same class-2 index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WallPair {
    pub supporting: Wall,
    pub covering: Wall,
}

impl WallPair {
    pub fn ground_state(ty: AffineType, k: usize) -> Result<Self> {
        Ok(WallPair {
            supporting: Wall::ground_state(
                ty,
                Ground {
                    kind: GroundKind::Supporting,
                    k,
                },
            )?,
            covering: Wall::ground_state(
                ty,
                Ground {
                    kind: GroundKind::Covering,
                    k,
                },
            )?,
        })
    }

    pub fn k(&self) -> usize {
        self.supporting.ground.k
    }

    pub fn atom_count(&self) -> u32 {
        self.supporting.atom_count() + self.covering.atom_count()
    }

    /// Columns whose base half-height block is still alone.
    fn open_bases(w: &Wall) -> BTreeSet<usize> {
        let g = w.ground_column();
        (0..w.cols.len()).filter(|&c| w.column(c) == g).collect()
    }

    pub fn is_synchronized(&self) -> bool {
        let a = self.supporting.cols.len();
        let b = self.covering.cols.len();
        a == b && Self::open_bases(&self.supporting) == Self::open_bases(&self.covering)
    }

    pub fn is_proper(&self) -> bool {
        self.supporting.is_proper() && self.covering.is_proper()
    }

    /// What one side of a pair contributes to synchronization and to the
    /// joint `k`-pair moves.
    pub fn side_signature(w: &Wall) -> SideSignature {
        let g = w.ground_column();
        let one = Column::new(1, Partial::None);
        let mut add = BTreeSet::new();
        let mut remove = BTreeSet::new();
        for c in 0..=w.cols.len() {
            let a = w.column(c);
            if a == g && w.with_column(c, one).locally_valid(c) {
                add.insert(c);
            } else if a == one && w.with_column(c, g).locally_valid(c) {
                remove.insert(c);
            }
        }
        SideSignature {
            len: w.cols.len(),
            open: Self::open_bases(w),
            add,
            remove,
        }
    }

    /// One side after the base block of a single open column is filled, as a
    /// joint `k`-pair add would do.
    pub fn side_base_fills(w: &Wall) -> Vec<Wall> {
        let one = Column::new(1, Partial::None);
        Self::side_signature(w)
            .add
            .into_iter()
            .map(|c| w.with_column(c, one))
            .filter(Wall::is_proper)
            .collect()
    }

    /// Columns carrying a `k`-pair add and a `k`-pair removal.
    pub fn joint_columns(a: &SideSignature, b: &SideSignature) -> (Vec<usize>, Vec<usize>) {
        (
            a.add.intersection(&b.add).copied().collect(),
            a.remove.intersection(&b.remove).copied().collect(),
        )
    }

    fn pair_moves(&self) -> Vec<Site> {
        let k = self.k();
        let tbar = self.supporting.base_level();
        let g = self.supporting.ground_column();
        let one = Column::new(1, Partial::None);
        let (adds, removes) = Self::joint_columns(
            &Self::side_signature(&self.supporting),
            &Self::side_signature(&self.covering),
        );
        let site = |c, before, after, action| Site {
            host: Host::Pair,
            action,
            multiplicity: Multiplicity::Single,
            color: k,
            column: c,
            level: tbar,
            shift_arg: HalfInt::from_int(tbar),
            piece: PieceKind::HalfHeightUpper,
            before,
            after,
        };
        let mut out: Vec<Site> = adds.into_iter().map(|c| site(c, g, one, Action::Add)).collect();
        out.extend(removes.into_iter().map(|c| site(c, one, g, Action::Remove)));
        out.sort_by_key(|s| s.column);
        out
    }

    pub fn moves(&self) -> Vec<Site> {
        let mut out = self.supporting.moves();
        out.extend(self.covering.moves());
        out.extend(self.pair_moves());
        out
    }

    pub fn sites(&self) -> Result<Vec<Site>> {
        if !self.is_proper() {
            return Err(Error::NotProper);
        }
        Ok(classify(self.moves()))
    }

    pub fn apply(&self, site: &Site) -> Result<WallPair> {
        if !self.moves().contains(site) {
            return Err(Error::SiteNotPresent);
        }
        let mut out = self.clone();
        match site.host {
            Host::Supporting => out.supporting = self.supporting.with_column(site.column, site.after),
            Host::Covering => out.covering = self.covering.with_column(site.column, site.after),
            Host::Pair => {
                out.supporting = self.supporting.with_column(site.column, site.after);
                out.covering = self.covering.with_column(site.column, site.after);
            }
            Host::Young => return Err(Error::HostMismatch),
        }
        if !out.is_proper() || !out.is_synchronized() {
            return Err(Error::ResultImproper);
        }
        Ok(out)
    }
}

/// A single wall for class-1 indices or a pair for class-2 indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WallOrPair {
    Wall(Wall),
    Pair(WallPair),
}

impl WallOrPair {
    pub fn ground_state(ty: AffineType, k: usize) -> Result<Self> {
        if ty.index_class(k)? == 1 {
            Ok(WallOrPair::Wall(Wall::ground_state(
                ty,
                Ground {
                    kind: GroundKind::Level1,
                    k,
                },
            )?))
        } else {
            Ok(WallOrPair::Pair(WallPair::ground_state(ty, k)?))
        }
    }

    pub fn wall_type(&self) -> AffineType {
        match self {
            WallOrPair::Wall(w) => w.ty,
            WallOrPair::Pair(p) => p.supporting.ty,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            WallOrPair::Wall(w) => w.ground.k,
            WallOrPair::Pair(p) => p.k(),
        }
    }

    pub fn atom_count(&self) -> u32 {
        match self {
            WallOrPair::Wall(w) => w.atom_count(),
            WallOrPair::Pair(p) => p.atom_count(),
        }
    }

    pub fn is_proper(&self) -> bool {
        match self {
            WallOrPair::Wall(w) => w.is_proper(),
            WallOrPair::Pair(p) => p.is_proper(),
        }
    }

    pub fn is_ground_state(&self) -> bool {
        self.atom_count() == 0
    }

    pub fn moves(&self) -> Vec<Site> {
        match self {
            WallOrPair::Wall(w) => w.moves(),
            WallOrPair::Pair(p) => p.moves(),
        }
    }

    pub fn sites(&self) -> Result<Vec<Site>> {
        match self {
            WallOrPair::Wall(w) => w.sites(),
            WallOrPair::Pair(p) => p.sites(),
        }
    }

    pub fn apply(&self, site: &Site) -> Result<WallOrPair> {
        match self {
            WallOrPair::Wall(w) => w.apply(site).map(WallOrPair::Wall),
            WallOrPair::Pair(p) => p.apply(site).map(WallOrPair::Pair),
        }
    }

    /// Atom-count change of a move.
    pub fn move_size(site: &Site) -> u32 {
        match (site.host, site.multiplicity) {
            (Host::Pair, _) | (_, Multiplicity::Double) => 2,
            _ => 1,
        }
    }
}

/// Proper supporting and covering walls over the class-2 index `k` with at
/// most `max_atoms` atoms each.
pub fn pair_sides(ty: AffineType, k: usize, max_atoms: u32) -> Result<(Vec<Wall>, Vec<Wall>)> {
    let p = WallPair::ground_state(ty, k)?;
    let side = |w: &Wall| -> Vec<Wall> {
        w.enumerate_structural(max_atoms)
            .into_iter()
            .filter(|w| w.is_proper())
            .collect()
    };
    Ok((side(&p.supporting), side(&p.covering)))
}

/// All proper walls (or synchronized pairs) over the ground state of `k`
/// with at most `max_atoms` atoms above the ground, sorted.
pub fn enumerate(ty: AffineType, k: usize, max_atoms: u32) -> Result<Vec<WallOrPair>> {
    let g = WallOrPair::ground_state(ty, k)?;
    let mut out: Vec<WallOrPair> = match g {
        WallOrPair::Wall(w) => w
            .enumerate_structural(max_atoms)
            .into_iter()
            .filter(|w| w.is_proper())
            .map(WallOrPair::Wall)
            .collect(),
        WallOrPair::Pair(_) => {
            let (sup, cov) = pair_sides(ty, k, max_atoms)?;
            // synchronized pairs share the column count and the open bases
            let mut by_key: std::collections::HashMap<(usize, BTreeSet<usize>), Vec<&Wall>> =
                std::collections::HashMap::new();
            for c in &cov {
                by_key
                    .entry((c.cols.len(), WallPair::open_bases(c)))
                    .or_default()
                    .push(c);
            }
            let mut v = Vec::new();
            for s in &sup {
                let sa = s.atom_count();
                let key = (s.cols.len(), WallPair::open_bases(s));
                for c in by_key.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                    if sa + c.atom_count() > max_atoms {
                        continue;
                    }
                    v.push(WallOrPair::Pair(WallPair {
                        supporting: s.clone(),
                        covering: (*c).clone(),
                    }));
                }
            }
            v
        }
    };
    out.sort();
    out.dedup();
    Ok(out)
}

// ---------------------------------------------------------------- rendering

fn color_width(ty: AffineType) -> usize {
    ty.n().to_string().len()
}

fn render_wall(w: &Wall) -> String {
    let cw = color_width(w.ty);
    let cell_w = 2 * cw + 1;
    let shown = w.cols.len() + 1;
    let top = (0..shown)
        .map(|c| w.column(c).cells + (w.column(c).partial != Partial::None) as u32)
        .max()
        .unwrap_or(0)
        .max(1);
    let blank = " ".repeat(cell_w);
    let mut lines = Vec::new();
    for m in (0..top).rev() {
        for half in [1u8, 0u8] {
            let mut line = String::new();
            for c in (0..shown).rev() {
                let col = w.column(c);
                let complete = m < col.cells;
                let partial = m == col.cells && col.partial != Partial::None;
                let txt = if !complete && !partial {
                    blank.clone()
                } else {
                    match w.cell_kind(c, m) {
                        CellKind::Unit(t) => format!("{t:^cell_w$}"),
                        CellKind::HalfHeight(t) => {
                            if half == 0 || complete {
                                format!("={:^w$}=", t, w = cw * 2 - 1)
                            } else {
                                blank.clone()
                            }
                        }
                        CellKind::Split { front, back } => {
                            let f = if complete || col.partial == Partial::Front {
                                format!("{front:>cw$}")
                            } else {
                                ".".repeat(cw)
                            };
                            let b = if complete || col.partial == Partial::Back {
                                format!("{back:<cw$}")
                            } else {
                                ".".repeat(cw)
                            };
                            format!("{f}/{b}")
                        }
                    }
                };
                line.push('|');
                line.push_str(&txt);
            }
            line.push('|');
            lines.push(line.trim_end().to_string());
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out.push_str(&format!(
        "{}^ (0,{}) {}:{}:k={}\n",
        " ".repeat((cell_w + 1) * shown - cell_w / 2 - 1),
        w.base_level(),
        match w.ground.kind {
            GroundKind::Level1 => "young",
            GroundKind::Supporting => "sup",
            GroundKind::Covering => "cov",
        },
        w.ty.family(),
        w.ground.k
    ));
    out
}

/// Deterministic ASCII drawing. Each text row is half a unit high. Unit
/// cubes show their color and half-height blocks are framed by `=`.
/// Half-thickness cells show `front/back` with `.` for a missing atom.
pub fn render(w: &WallOrPair) -> String {
    match w {
        WallOrPair::Wall(w) => render_wall(w),
        WallOrPair::Pair(p) => format!("{}\n{}", render_wall(&p.supporting), render_wall(&p.covering)),
    }
}

// ---------------------------------------------------------------- literals

fn kind_tag(k: GroundKind) -> &'static str {
    match k {
        GroundKind::Level1 => "young",
        GroundKind::Supporting => "sup",
        GroundKind::Covering => "cov",
    }
}

fn column_token(w: &Wall, c: usize) -> String {
    let col = w.column(c);
    let mut t = w.atoms_in_column(c).to_string();
    match (col.partial, w.cell_kind(c, col.cells)) {
        (Partial::Front, _) => t.push('f'),
        (Partial::Back, _) if col.cells > 0 || w.ground_column().partial != Partial::Back => t.push('b'),
        _ => {}
    }
    t
}

fn columns_literal(w: &Wall) -> String {
    let toks: Vec<String> = (0..w.cols.len()).map(|c| column_token(w, c)).collect();
    format!("[{}]", toks.join(","))
}

/// `ground=cov:C1_3:k=1;cols=[3,1]`, or for pairs
/// `ground=pair:C1_3:k=1;sup=[..];cov=[..]`. Column tokens are atom counts
/// above the ground, right to left, with a trailing `f` or `b` when the top
/// cell is a half-thickness cell holding only its front or back atom.
pub fn to_literal(w: &WallOrPair) -> String {
    match w {
        WallOrPair::Wall(w) => format!(
            "ground={}:{}:k={};cols={}",
            kind_tag(w.ground.kind),
            w.ty,
            w.ground.k,
            columns_literal(w)
        ),
        WallOrPair::Pair(p) => format!(
            "ground=pair:{}:k={};sup={};cov={}",
            p.supporting.ty,
            p.k(),
            columns_literal(&p.supporting),
            columns_literal(&p.covering)
        ),
    }
}

fn parse_columns(w: &Wall, list: &str) -> Result<Vec<Column>> {
    let bad = |m: String| Error::Parse(format!("column list `{list}`: {m}"));
    let inner = list
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| bad("expected [..]".into()))?;
    let mut cols = Vec::new();
    for (c, tok) in inner.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
        let (num, suffix) = match tok.chars().last() {
            Some(ch @ ('f' | 'b')) => (&tok[..tok.len() - 1], Some(ch)),
            _ => (tok, None),
        };
        let want: u32 = num.parse().map_err(|_| bad(format!("token `{tok}`")))?;
        let g = w.ground_column();
        let g_atoms = w.raw_atoms(c, g);
        let mut found = None;
        let mut m = 0;
        while found.is_none() && m <= want + 1 {
            for p in [Partial::None, Partial::Lower, Partial::Front, Partial::Back] {
                let col = Column::new(m, p);
                if !w.partial_allowed(c, col) || !g.within(col) {
                    continue;
                }
                if w.raw_atoms(c, col) != g_atoms + want {
                    continue;
                }
                let ok = match (p, suffix) {
                    (Partial::Front, s) => s == Some('f'),
                    (Partial::Back, Some('b')) => true,
                    (Partial::Back, None) => m == 0 && g.partial == Partial::Back,
                    (_, None) => true,
                    _ => false,
                };
                if ok {
                    found = Some(col);
                    break;
                }
            }
            m += 1;
        }
        cols.push(found.ok_or_else(|| bad(format!("token `{tok}` fits no column state")))?);
    }
    Ok(cols)
}

fn parse_type(s: &str, rank: Option<usize>) -> Result<AffineType> {
    let (fam, n) = match s.split_once('_') {
        Some((f, n)) => (
            f,
            Some(n.parse::<usize>().map_err(|_| Error::Parse(format!("rank in `{s}`")))?),
        ),
        None => (s, rank),
    };
    let n = n.ok_or_else(|| Error::Parse(format!("type `{s}` needs a rank")))?;
    AffineType::new(fam.parse()?, n)
}

/// Inverse of [`to_literal`]. `rank` supplies the rank when the type token
/// omits it.
pub fn parse_literal(lit: &str, rank: Option<usize>) -> Result<WallOrPair> {
    let mut fields = std::collections::BTreeMap::new();
    for part in lit.split(';') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("field `{part}`")))?;
        fields.insert(k.trim().to_string(), v.trim().to_string());
    }
    let ground = fields
        .get("ground")
        .ok_or_else(|| Error::Parse("missing ground".into()))?;
    let mut it = ground.split(':');
    let kind = it.next().unwrap_or("");
    let ty = parse_type(it.next().unwrap_or(""), rank)?;
    let k: usize = it
        .next()
        .and_then(|s| s.strip_prefix("k="))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("ground `{ground}`")))?;
    let single = |gk: GroundKind, key: &str| -> Result<Wall> {
        let w = Wall::ground_state(ty, Ground { kind: gk, k })?;
        let cols = match fields.get(key) {
            Some(l) => parse_columns(&w, l)?,
            None => Vec::new(),
        };
        Wall::from_columns(ty, w.ground, cols)
    };
    let out = match kind {
        "young" => WallOrPair::Wall(single(GroundKind::Level1, "cols")?),
        "sup" => WallOrPair::Wall(single(GroundKind::Supporting, "cols")?),
        "cov" => WallOrPair::Wall(single(GroundKind::Covering, "cols")?),
        "pair" => {
            let p = WallPair {
                supporting: single(GroundKind::Supporting, "sup")?,
                covering: single(GroundKind::Covering, "cov")?,
            };
            if !p.is_synchronized() {
                return Err(Error::Malformed("pair is not synchronized".into()));
            }
            WallOrPair::Pair(p)
        }
        _ => return Err(Error::Parse(format!("ground kind `{kind}`"))),
    };
    Ok(out)
}

impl FromStr for WallOrPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_literal(s, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_data::Family;
    use std::collections::HashSet;

    fn c1() -> AffineType {
        AffineType::new(Family::C1, 3).unwrap()
    }

    fn lit(s: &str) -> WallOrPair {
        parse_literal(s, None).unwrap()
    }

    fn site_text(w: &WallOrPair) -> Vec<String> {
        let mut v: Vec<String> = w.sites().unwrap().iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    }

    fn find(w: &WallOrPair, color: usize, pos: (i64, i64), host: Host, action: Action) -> Site {
        *w.sites()
            .unwrap()
            .iter()
            .find(|s| s.color == color && s.position() == pos && s.host == host && s.action == action)
            .unwrap_or_else(|| panic!("no {color}-site at {pos:?} in {}", to_literal(w)))
    }

    #[test]
    fn ground_pair_has_one_site() {
        let g = WallOrPair::ground_state(c1(), 1).unwrap();
        assert_eq!(site_text(&g), ["1-admissible pair at (0,1)"]);
    }

    #[test]
    fn first_c1_wall_sites() {
        let y1 = lit("ground=pair:C1_3:k=1;sup=[1];cov=[1]");
        assert_eq!(
            site_text(&y1),
            [
                "1-removable pair at (0,1)",
                "2-admissible slot at (0,2) [supporting]",
                "2-admissible slot at (0,6) [covering]",
            ]
        );
        assert!(y1
            .sites()
            .unwrap()
            .iter()
            .all(|s| s.multiplicity == Multiplicity::Single));
    }

    #[test]
    fn first_b1_wall_sites() {
        let y1 = lit("ground=pair:B1_4:k=3;sup=[1];cov=[1]");
        let sites = y1.sites().unwrap();
        let double: Vec<_> = sites
            .iter()
            .filter(|s| s.multiplicity == Multiplicity::Double)
            .collect();
        assert_eq!(double.len(), 1);
        assert_eq!(
            (double[0].color, double[0].position(), double[0].action),
            (4, (0, 3), Action::Add)
        );
        let at5: BTreeSet<usize> = sites
            .iter()
            .filter(|s| s.position() == (0, 5) && s.action == Action::Add)
            .map(|s| s.color)
            .collect();
        assert_eq!(at5, BTreeSet::from([1, 2]));
        let pair = sites.iter().find(|s| s.host == Host::Pair).unwrap();
        assert_eq!((pair.color, pair.position(), pair.action), (3, (0, 2), Action::Remove));
        assert_eq!(sites.len(), 4);
    }

    #[test]
    fn adding_blocks() {
        let g = WallOrPair::ground_state(c1(), 1).unwrap();
        let p = find(&g, 1, (0, 1), Host::Pair, Action::Add);
        let y1 = g.apply(&p).unwrap();
        assert_eq!(to_literal(&y1), "ground=pair:C1_3:k=1;sup=[1];cov=[1]");
        let s = find(&y1, 2, (0, 6), Host::Covering, Action::Add);
        let y2 = y1.apply(&s).unwrap();
        assert_eq!(to_literal(&y2), "ground=pair:C1_3:k=1;sup=[1];cov=[2]");
        let back = y2.apply(&find(&y2, 2, (0, 6), Host::Covering, Action::Remove)).unwrap();
        assert_eq!(back, y1);
        let s = find(&y1, 2, (0, 2), Host::Supporting, Action::Add);
        assert_eq!(
            to_literal(&y1.apply(&s).unwrap()),
            "ground=pair:C1_3:k=1;sup=[2];cov=[1]"
        );
    }

    #[test]
    fn add_then_remove_round_trips() {
        for (ty, k) in [
            (c1(), 1),
            (c1(), 2),
            (AffineType::new(Family::B1, 4).unwrap(), 3),
            (AffineType::new(Family::D2, 3).unwrap(), 1),
        ] {
            for w in enumerate(ty, k, 4).unwrap() {
                for s in w.sites().unwrap().iter().filter(|s| s.action == Action::Add) {
                    let up = w.apply(s).unwrap();
                    let grown = up.atom_count() - w.atom_count();
                    assert!(grown == 1 || grown == 2, "{} grew by {grown}", to_literal(&w));
                    // the inverse may not be an admissible removal when a
                    // double block forms, so look among all moves
                    let undo = up
                        .moves()
                        .into_iter()
                        .find(|t| {
                            t.action == Action::Remove
                                && t.host == s.host
                                && t.column == s.column
                                && t.before == s.after
                                && t.after == s.before
                        })
                        .unwrap_or_else(|| panic!("no inverse of {s} in {}", to_literal(&w)));
                    assert_eq!(up.apply(&undo).unwrap(), w);
                }
            }
        }
    }

    #[test]
    fn equal_full_columns_are_improper() {
        // two full columns of the same height next to each other
        let mut improper = 0;
        for h in 1..=6 {
            let Ok(w) = parse_literal(&format!("ground=young:D2_3:k=1;cols=[{h},{h}]"), None) else {
                continue;
            };
            let WallOrPair::Wall(w) = &w else { unreachable!() };
            if w.column(0) == w.column(1) && w.column(0).partial == Partial::None {
                assert!(!w.is_proper(), "cols=[{h},{h}]");
                improper += 1;
            }
        }
        assert!(improper > 0);
        let ok = parse_literal("ground=young:D2_3:k=1;cols=[2,1]", None).unwrap();
        assert!(ok.is_proper());
    }

    #[test]
    fn literals_round_trip() {
        for (ty, k) in [
            (c1(), 1),
            (c1(), 3),
            (AffineType::new(Family::B1, 4).unwrap(), 3),
            (AffineType::new(Family::A2odd, 4).unwrap(), 1),
        ] {
            for w in enumerate(ty, k, 5).unwrap() {
                let s = to_literal(&w);
                assert_eq!(parse_literal(&s, None).unwrap(), w, "{s}");
            }
        }
        assert!(parse_literal("ground=cov:C1:k=1;cols=[1]", Some(3)).is_ok());
        assert!(parse_literal("ground=cov:C1:k=1;cols=[1]", None).is_err());
        assert!(parse_literal("nonsense", None).is_err());
    }

    #[test]
    fn render_is_injective() {
        for (ty, k) in [
            (c1(), 1),
            (c1(), 2),
            (AffineType::new(Family::B1, 4).unwrap(), 3),
            (AffineType::new(Family::D1, 6).unwrap(), 1),
        ] {
            let all = enumerate(ty, k, 4).unwrap();
            let pics: HashSet<String> = all.iter().map(render).collect();
            assert_eq!(pics.len(), all.len());
        }
    }

    #[test]
    fn enumeration_grows_monotonically() {
        let ty = AffineType::new(Family::B1, 4).unwrap();
        for k in 1..=4 {
            let ground = enumerate(ty, k, 0).unwrap();
            assert_eq!(ground.len(), 1);
            assert!(ground[0].is_ground_state());
            let mut prev: BTreeSet<WallOrPair> = ground.into_iter().collect();
            for b in 1..=5 {
                let cur: BTreeSet<WallOrPair> = enumerate(ty, k, b).unwrap().into_iter().collect();
                assert!(prev.is_subset(&cur), "k={k} b={b}");
                assert!(cur.iter().all(|w| w.is_proper() && w.atom_count() <= b));
                prev = cur;
            }
        }
    }

    #[test]
    fn sites_stay_in_the_enumeration() {
        let ty = AffineType::new(Family::D2, 3).unwrap();
        for k in 1..=3 {
            let small = enumerate(ty, k, 5).unwrap();
            let big: BTreeSet<WallOrPair> = enumerate(ty, k, 7).unwrap().into_iter().collect();
            for w in &small {
                for s in w.sites().unwrap() {
                    assert!(big.contains(&w.apply(&s).unwrap()));
                }
            }
        }
    }

    #[test]
    fn pairs_are_synchronized() {
        for (ty, k) in [
            (c1(), 1),
            (c1(), 2),
            (AffineType::new(Family::B1, 4).unwrap(), 3),
            (AffineType::new(Family::D1, 6).unwrap(), 3),
        ] {
            for w in enumerate(ty, k, 6).unwrap() {
                if let WallOrPair::Pair(p) = &w {
                    assert!(p.is_synchronized(), "{}", to_literal(&w));
                }
            }
        }
    }
}
