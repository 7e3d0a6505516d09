//! Parametric platformer sections and the experience chart they induce.
//!
//! Each section is described by artifact parameters (tiles, enemies, jump
//! geometry). Intensity is approximated as
//!
//! ```text
//! jump   = jump_v + 3 * jump_h
//! enemy  = enemy_state * enemies / tiles * 400 * player_state
//! result = round_half_up(jump + enemy)
//! ```
//!
//! and the gameplay category follows the chain Reward > Pit > Enemy >
//! Platforming. Beats are one per reachable `(section, player state)` pair,
//! named like `4-big` or `8-small-star`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{BeatId, ExperienceChart, Position, SpecDraft, SpecId};
use crate::paths::{RoutePredicate, RouteRule};
use crate::store::Project;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnemyState {
    #[default]
    Ground,
    Platform,
}

impl EnemyState {
    pub fn multiplier(self) -> f64 {
        match self {
            EnemyState::Ground => 1.0,
            EnemyState::Platform => 0.5,
        }
    }
}

/// Player state as it enters the intensity formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerState {
    Small,
    Big,
    Flower,
    Star,
}

impl PlayerState {
    pub const ALL: [PlayerState; 4] = [
        PlayerState::Small,
        PlayerState::Big,
        PlayerState::Flower,
        PlayerState::Star,
    ];

    pub fn multiplier(self) -> f64 {
        match self {
            PlayerState::Small => 1.0,
            PlayerState::Big => 0.5,
            PlayerState::Flower => 0.25,
            PlayerState::Star => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlayerState::Small => "small",
            PlayerState::Big => "big",
            PlayerState::Flower => "flower",
            PlayerState::Star => "star",
        }
    }
}

/// Power-up level, independent of a running star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Small,
    Big,
    Flower,
}

impl Form {
    pub const ALL: [Form; 3] = [Form::Small, Form::Big, Form::Flower];

    /// Next level granted by a power-up; flower is the top.
    pub fn upgraded(self) -> Form {
        match self {
            Form::Small => Form::Big,
            Form::Big | Form::Flower => Form::Flower,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Form::Small => "small",
            Form::Big => "big",
            Form::Flower => "flower",
        }
    }
}

/// Player state on entering a section: a form, optionally under a star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeatState {
    pub form: Form,
    pub star: bool,
}

impl BeatState {
    pub const SMALL: BeatState = BeatState::plain(Form::Small);

    pub const fn plain(form: Form) -> Self {
        Self { form, star: false }
    }

    pub const fn starred(form: Form) -> Self {
        Self { form, star: true }
    }

    pub fn player_state(self) -> PlayerState {
        if self.star {
            return PlayerState::Star;
        }
        match self.form {
            Form::Small => PlayerState::Small,
            Form::Big => PlayerState::Big,
            Form::Flower => PlayerState::Flower,
        }
    }
}

impl fmt::Display for BeatState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.form.as_str())?;
        if self.star {
            f.write_str("-star")?;
        }
        Ok(())
    }
}

impl FromStr for BeatState {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (form, star) = match s.strip_suffix("-star") {
            Some(form) => (form, true),
            None => (s, false),
        };
        let form = Form::ALL
            .into_iter()
            .find(|f| f.as_str() == form)
            .ok_or_else(|| LevelError::BadBeatName(s.to_owned()))?;
        Ok(Self { form, star })
    }
}

pub fn beat_name(section: u32, state: BeatState) -> String {
    format!("{section}-{state}")
}

/// Inverse of [`beat_name`].
pub fn parse_beat_name(name: &str) -> Result<(u32, BeatState), LevelError> {
    let bad = || LevelError::BadBeatName(name.to_owned());
    let (section, state) = name.split_once('-').ok_or_else(bad)?;
    let section: u32 = section.parse().map_err(|_| bad())?;
    if section == 0 {
        return Err(bad());
    }
    Ok((section, state.parse().map_err(|_| bad())?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionModel {
    pub section_no: u32,
    pub tiles: u32,
    pub enemies: u32,
    #[serde(default)]
    pub enemy_state: EnemyState,
    #[serde(default)]
    pub jump_v: u32,
    #[serde(default)]
    pub jump_h: u32,
    #[serde(default)]
    pub has_pit: bool,
    /// A non-star power-up can be collected here.
    #[serde(default)]
    pub has_powerup: bool,
    /// Goal or secret area.
    #[serde(default)]
    pub is_reward_section: bool,
}

impl SectionModel {
    /// A bare section: no enemies, jumps, pits or power-ups.
    pub fn plain(section_no: u32, tiles: u32) -> Self {
        Self {
            section_no,
            tiles,
            enemies: 0,
            enemy_state: EnemyState::Ground,
            jump_v: 0,
            jump_h: 0,
            has_pit: false,
            has_powerup: false,
            is_reward_section: false,
        }
    }
}

pub fn jump_factor(section: &SectionModel) -> f64 {
    f64::from(section.jump_v) + f64::from(section.jump_h) * 3.0
}

pub fn enemy_factor(section: &SectionModel, player: PlayerState) -> f64 {
    // Multipliers are dyadic, so only the final division rounds.
    section.enemy_state.multiplier() * player.multiplier() * 400.0 * f64::from(section.enemies)
        / f64::from(section.tiles)
}

/// Rounds half away from zero for the nonnegative values used here.
pub fn round_half_up(value: f64) -> i64 {
    (value + 0.5).floor() as i64
}

/// Unclamped intensity.
pub fn section_intensity(section: &SectionModel, player: PlayerState) -> i64 {
    round_half_up(jump_factor(section) + enemy_factor(section, player))
}

/// Intensity as stored in a spec.
pub fn clamp_intensity(raw: i64) -> f64 {
    raw.clamp(0, 100) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Reward,
    Pit,
    Enemy,
    Platforming,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Reward => "Reward",
            Category::Pit => "Pit",
            Category::Enemy => "Enemy",
            Category::Platforming => "Platforming",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn section_category(section: &SectionModel, player: PlayerState) -> Category {
    if player == PlayerState::Star || section.is_reward_section {
        Category::Reward
    } else if section.has_pit {
        Category::Pit
    } else if section.enemies >= 1 {
        Category::Enemy
    } else {
        Category::Platforming
    }
}

pub fn spec_name(section: u32, player: PlayerState) -> String {
    format!("sec{section}-{}", player.as_str())
}

/// Both intensities get the section intensity, except that rewards get a
/// narrative intensity of 100. Playtime is one second per tile.
pub fn build_spec(section: &SectionModel, player: PlayerState) -> SpecDraft {
    let intensity = clamp_intensity(section_intensity(section, player));
    let category = section_category(section, player);
    let narrative = if category == Category::Reward {
        100.0
    } else {
        intensity
    };
    SpecDraft {
        name: spec_name(section.section_no, player),
        description: format!(
            "Section {} entered as {}",
            section.section_no,
            player.as_str()
        ),
        narrative_intensity: narrative,
        gameplay_intensity: intensity,
        gameplay_category: category.as_str().to_owned(),
        expected_playtime: f64::from(section.tiles),
    }
}

fn default_star_duration() -> u32 {
    2
}

/// A side path leaving the main line at `from`, entering section `to`, and
/// optionally continuing into main-line section `rejoin`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    #[serde(default)]
    pub rejoin: Option<u32>,
}

/// How the player state can change between sections.
///
/// Power-ups come from [`SectionModel::has_powerup`] and damage from
/// sections with enemies; this adds the star and branch structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRules {
    /// Section holding the star; it stays active for `star_duration`
    /// following main-line sections.
    #[serde(default)]
    pub star_pickup: Option<u32>,
    #[serde(default = "default_star_duration")]
    pub star_duration: u32,
    #[serde(default)]
    pub branches: Vec<Branch>,
}

impl Default for TransitionRules {
    fn default() -> Self {
        Self {
            star_pickup: None,
            star_duration: default_star_duration(),
            branches: Vec::new(),
        }
    }
}

/// A demo-config document: sections plus transition rules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub name: String,
    pub sections: Vec<SectionModel>,
    #[serde(default)]
    pub rules: TransitionRules,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevelError {
    #[error("invalid transition rules: {0}")]
    InvalidRules(String),
    #[error("`{0}` is not a beat name of the form <section>-<state>")]
    BadBeatName(String),
}

fn invalid(message: impl Into<String>) -> LevelError {
    LevelError::InvalidRules(message.into())
}

/// Section graph derived from a validated config.
struct Layout<'a> {
    sections: BTreeMap<u32, &'a SectionModel>,
    main_line: Vec<u32>,
    successors: HashMap<u32, Vec<u32>>,
    star_window: BTreeSet<u32>,
    /// Column per section for layout: main-line index, branch sections next
    /// to their source.
    column: HashMap<u32, usize>,
}

impl<'a> Layout<'a> {
    fn new(config: &'a LevelConfig) -> Result<Self, LevelError> {
        if config.sections.is_empty() {
            return Err(invalid("no sections"));
        }
        let mut sections = BTreeMap::new();
        for s in &config.sections {
            if s.section_no == 0 {
                return Err(invalid("section numbers start at 1"));
            }
            if s.tiles == 0 {
                return Err(invalid(format!("section {} has no tiles", s.section_no)));
            }
            if sections.insert(s.section_no, s).is_some() {
                return Err(invalid(format!("section {} listed twice", s.section_no)));
            }
        }
        let rules = &config.rules;
        let branch_targets: BTreeSet<u32> = rules.branches.iter().map(|b| b.to).collect();
        let main_line: Vec<u32> = config
            .sections
            .iter()
            .map(|s| s.section_no)
            .filter(|n| !branch_targets.contains(n))
            .collect();
        if main_line.is_empty() {
            return Err(invalid("every section is a branch target"));
        }
        let rank = |n: u32| main_line.iter().position(|&m| m == n);

        let mut successors: HashMap<u32, Vec<u32>> = HashMap::new();
        for pair in main_line.windows(2) {
            successors.entry(pair[0]).or_default().push(pair[1]);
        }
        let mut column: HashMap<u32, usize> =
            main_line.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        for branch in &rules.branches {
            let from_rank = rank(branch.from).ok_or_else(|| {
                invalid(format!(
                    "branch source {} is not a main-line section",
                    branch.from
                ))
            })?;
            if !sections.contains_key(&branch.to) {
                return Err(invalid(format!(
                    "branch target {} is not a section",
                    branch.to
                )));
            }
            if let Some(rejoin) = branch.rejoin {
                let rejoin_rank = rank(rejoin).ok_or_else(|| {
                    invalid(format!("rejoin target {rejoin} is not a main-line section"))
                })?;
                if rejoin_rank <= from_rank {
                    return Err(invalid(format!(
                        "rejoin target {rejoin} comes before branch source {}",
                        branch.from
                    )));
                }
                successors.entry(branch.to).or_default().push(rejoin);
            }
            successors.entry(branch.from).or_default().push(branch.to);
            column.insert(branch.to, from_rank + 1);
        }
        for list in successors.values_mut() {
            list.sort_unstable();
            list.dedup();
        }

        let mut star_window = BTreeSet::new();
        if let Some(pickup) = rules.star_pickup {
            let at = rank(pickup).ok_or_else(|| {
                invalid(format!("star pickup {pickup} is not a main-line section"))
            })?;
            star_window.extend(
                main_line
                    .iter()
                    .skip(at + 1)
                    .take(rules.star_duration as usize),
            );
        }
        Ok(Self {
            sections,
            main_line,
            successors,
            star_window,
            column,
        })
    }

    /// States reachable in `next` when leaving `section` as `state`.
    fn transitions(
        &self,
        section: u32,
        state: BeatState,
        next: u32,
        rules: &TransitionRules,
    ) -> BTreeSet<BeatState> {
        let model = self.sections[&section];
        let mut out = BTreeSet::new();
        if state.star {
            // Star beats keep the star inside the window and drop it after.
            out.insert(BeatState {
                form: state.form,
                star: self.star_window.contains(&next),
            });
            return out;
        }
        out.insert(state);
        if model.has_powerup {
            out.insert(BeatState::plain(state.form.upgraded()));
        }
        if model.enemies >= 1 {
            out.insert(BeatState::SMALL);
        }
        if rules.star_pickup == Some(section) && self.star_window.contains(&next) {
            out.insert(BeatState::starred(state.form));
            out.insert(BeatState::starred(Form::Small));
        }
        out
    }
}

/// Generates one beat per reachable `(section, state)` pair, starting from
/// the first main-line section as a small player, with edges induced by
/// power-ups, damage, the star and branches. Specs are shared between
/// beats of a section whose values coincide.
pub fn build_demo_chart(config: &LevelConfig) -> Result<Project, LevelError> {
    let layout = Layout::new(config)?;
    let start = (layout.main_line[0], BeatState::SMALL);

    let mut reachable = BTreeSet::from([start]);
    let mut transitions = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some((section, state)) = queue.pop_front() {
        for &next in layout
            .successors
            .get(&section)
            .map_or(&[][..], Vec::as_slice)
        {
            for next_state in layout.transitions(section, state, next, &config.rules) {
                transitions.insert(((section, state), (next, next_state)));
                if reachable.insert((next, next_state)) {
                    queue.push_back((next, next_state));
                }
            }
        }
    }

    let order = |&(section, state): &(u32, BeatState)| (layout.column[&section], section, state);
    let mut beats: Vec<(u32, BeatState)> = reachable.into_iter().collect();
    beats.sort_by_key(order);

    let mut chart = ExperienceChart::new();
    let mut shared: HashMap<u32, Vec<(SpecDraft, SpecId)>> = HashMap::new();
    let mut ids: HashMap<(u32, BeatState), BeatId> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    for &(section, state) in &beats {
        let draft = build_spec(layout.sections[&section], state.player_state());
        let known = shared.entry(section).or_default();
        let spec = match known.iter().find(|(d, _)| same_values(d, &draft)) {
            Some((_, id)) => id.clone(),
            None => {
                let id = chart
                    .add_spec(draft.clone())
                    .map_err(|e| invalid(e.to_string()))?;
                known.push((draft, id.clone()));
                id
            }
        };
        let beat = chart
            .add_beat(beat_name(section, state), Some(spec))
            .expect("spec was just added");
        let column = layout.column[&section];
        let row = rows.entry(column).or_default();
        chart
            .set_position(
                &beat,
                Some(Position {
                    x: column as f64 * 220.0,
                    y: *row as f64 * 120.0,
                }),
            )
            .expect("beat was just added");
        *row += 1;
        ids.insert((section, state), beat);
    }

    let mut edges: Vec<_> = transitions.into_iter().collect();
    edges.sort_by_key(|(from, to)| (order(from), order(to)));
    for (from, to) in edges {
        chart
            .add_edge(&ids[&from], &ids[&to])
            .map_err(|e| invalid(e.to_string()))?;
    }
    Ok(Project::with_chart(config.name.clone(), chart))
}

fn same_values(a: &SpecDraft, b: &SpecDraft) -> bool {
    a.narrative_intensity == b.narrative_intensity
        && a.gameplay_intensity == b.gameplay_intensity
        && a.gameplay_category == b.gameplay_category
        && a.expected_playtime == b.expected_playtime
}

impl LevelConfig {
    /// Keeps main-line sections up to and including `last`, together with
    /// branches leaving them. Rejoins and a star pickup that fall outside
    /// are dropped.
    pub fn prefix(&self, last: u32) -> Self {
        let targets: BTreeSet<u32> = self.rules.branches.iter().map(|b| b.to).collect();
        let mut kept_main = BTreeSet::new();
        for s in &self.sections {
            if targets.contains(&s.section_no) {
                continue;
            }
            kept_main.insert(s.section_no);
            if s.section_no == last {
                break;
            }
        }
        let branches: Vec<Branch> = self
            .rules
            .branches
            .iter()
            .filter(|b| kept_main.contains(&b.from))
            .map(|b| Branch {
                from: b.from,
                to: b.to,
                rejoin: b.rejoin.filter(|r| kept_main.contains(r)),
            })
            .collect();
        let kept_targets: BTreeSet<u32> = branches.iter().map(|b| b.to).collect();
        Self {
            name: self.name.clone(),
            sections: self
                .sections
                .iter()
                .filter(|s| {
                    kept_main.contains(&s.section_no) || kept_targets.contains(&s.section_no)
                })
                .cloned()
                .collect(),
            rules: TransitionRules {
                star_pickup: self.rules.star_pickup.filter(|p| kept_main.contains(p)),
                star_duration: self.rules.star_duration,
                branches,
            },
        }
    }

    /// Sections holding non-star power-ups, in main-line order.
    fn powerup_sections(&self) -> Vec<u32> {
        self.sections
            .iter()
            .filter(|s| s.has_powerup)
            .map(|s| s.section_no)
            .collect()
    }

    /// Section numbers in play order, branch sections right after their
    /// source.
    fn play_order(&self) -> Vec<u32> {
        let targets: BTreeSet<u32> = self.rules.branches.iter().map(|b| b.to).collect();
        let mut order = Vec::new();
        for s in self
            .sections
            .iter()
            .filter(|s| !targets.contains(&s.section_no))
        {
            order.push(s.section_no);
            for b in self
                .rules
                .branches
                .iter()
                .filter(|b| b.from == s.section_no)
            {
                order.push(b.to);
            }
        }
        order
    }
}

/// A rough replica of World 1-1 split into 14 sections. Tile and enemy
/// counts are eyeballed approximations; the transition structure follows
/// the original level (pipe, power-ups, star).
pub fn world_1_1() -> LevelConfig {
    let section = |n, tiles, enemies, jump_v, jump_h| SectionModel {
        section_no: n,
        tiles,
        enemies,
        enemy_state: EnemyState::Ground,
        jump_v,
        jump_h,
        has_pit: false,
        has_powerup: false,
        is_reward_section: false,
    };
    let mut sections = vec![
        SectionModel {
            has_powerup: true,
            ..section(1, 16, 1, 0, 0)
        },
        section(2, 12, 0, 2, 0),
        section(3, 20, 2, 3, 0),
        section(4, 18, 2, 4, 0),
        SectionModel {
            has_pit: true,
            ..section(5, 14, 0, 0, 2)
        },
        SectionModel {
            has_pit: true,
            has_powerup: true,
            ..section(6, 22, 1, 0, 2)
        },
        SectionModel {
            enemy_state: EnemyState::Platform,
            ..section(7, 24, 3, 1, 0)
        },
        SectionModel {
            has_pit: true,
            ..section(8, 20, 2, 0, 1)
        },
        section(9, 18, 4, 0, 0),
        section(10, 18, 4, 2, 0),
        SectionModel {
            has_pit: true,
            ..section(11, 20, 0, 4, 1)
        },
        section(12, 22, 2, 4, 0),
        SectionModel {
            is_reward_section: true,
            ..section(13, 18, 0, 8, 0)
        },
        SectionModel {
            is_reward_section: true,
            ..section(14, 16, 0, 0, 0)
        },
    ];
    sections.sort_by_key(|s| s.section_no);
    LevelConfig {
        name: "World 1-1".to_owned(),
        sections,
        rules: TransitionRules {
            star_pickup: Some(7),
            star_duration: 2,
            branches: vec![Branch {
                from: 4,
                to: 14,
                rejoin: Some(12),
            }],
        },
    }
}

fn beats_where(chart: &ExperienceChart, keep: impl Fn(u32, BeatState) -> bool) -> BTreeSet<BeatId> {
    chart
        .beats()
        .filter(|b| parse_beat_name(&b.name).is_ok_and(|(n, s)| keep(n, s)))
        .map(|b| b.id.clone())
        .collect()
}

/// Route labels for a generated chart:
///
/// * `Neutral`: no star beat and no branch-section beat
/// * `Star`: passes star beats
/// * `Hidden`: passes a branch section
/// * `Small`: never big or flower
/// * `Big`: never small after the first power-up, never flower
/// * `Flower`: never small after the first power-up, never big after the second
pub fn route_rules(config: &LevelConfig, chart: &ExperienceChart) -> Vec<RouteRule> {
    use RoutePredicate::{And, ContainsAnyOf, ContainsNoneOf};

    let order = config.play_order();
    let pos = |n: u32| order.iter().position(|&m| m == n).unwrap_or(usize::MAX);
    let hidden: BTreeSet<u32> = config.rules.branches.iter().map(|b| b.to).collect();
    let powerups = config.powerup_sections();
    let after =
        |section: u32, nth: usize| powerups.get(nth).is_some_and(|&p| pos(section) > pos(p));

    let star = beats_where(chart, |_, s| s.star);
    let branch = beats_where(chart, |n, _| hidden.contains(&n));
    let not_small = beats_where(chart, |_, s| s.form != Form::Small);
    let flower = beats_where(chart, |_, s| s.form == Form::Flower);
    let small_late = beats_where(chart, |n, s| s.form == Form::Small && after(n, 0));
    let big_late = beats_where(chart, |n, s| s.form == Form::Big && after(n, 1));

    vec![
        RouteRule::new(
            "Neutral",
            And(vec![
                ContainsNoneOf(star.clone()),
                ContainsNoneOf(branch.clone()),
            ]),
        ),
        RouteRule::new("Star", ContainsAnyOf(star)),
        RouteRule::new("Hidden", ContainsAnyOf(branch)),
        RouteRule::new("Small", ContainsNoneOf(not_small)),
        RouteRule::new(
            "Big",
            And(vec![
                ContainsNoneOf(small_late.clone()),
                ContainsNoneOf(flower),
            ]),
        ),
        RouteRule::new(
            "Flower",
            And(vec![ContainsNoneOf(small_late), ContainsNoneOf(big_late)]),
        ),
    ]
}
