use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use parrondo_core::game::parse_probability;
use parrondo_core::{make_parrondo, Error, ParrondoSpec, Result, WalkSpec};
use serde_json::Value;

/// A game as given on the command line, keeping the Parrondo form when known.
#[derive(Debug, Clone)]
pub enum GameInput {
    Parrondo(ParrondoSpec),
    Walk(WalkSpec),
}

impl GameInput {
    pub fn walk(&self) -> Result<WalkSpec> {
        match self {
            GameInput::Parrondo(s) => make_parrondo(s),
            GameInput::Walk(w) => Ok(w.clone()),
        }
    }

    pub fn parrondo(&self) -> Option<ParrondoSpec> {
        match self {
            GameInput::Parrondo(s) => Some(*s),
            GameInput::Walk(_) => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Parrondo game G(M, P, PP); repeat for a second game
    #[arg(long, num_args = 3, value_names = ["M", "P", "PP"], action = clap::ArgAction::Append)]
    pub parrondo: Vec<String>,

    /// game from a JSON file (walk, Parrondo spec, or a report with a "game" key); repeatable
    #[arg(long, value_name = "FILE")]
    pub game: Vec<PathBuf>,

    /// period of an explicit walk
    #[arg(long)]
    pub m: Option<usize>,

    /// comma-separated up-probabilities of an explicit walk
    #[arg(long, value_name = "CSV")]
    pub p: Option<String>,

    /// comma-separated down-probabilities (default 1 - p)
    #[arg(long, value_name = "CSV")]
    pub q: Option<String>,
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_probability).collect()
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(x.trim().into())))
        .collect()
}

impl GameArgs {
    /// All games in the order `--parrondo`, `--game`, explicit walk.
    pub fn games(&self) -> Result<Vec<GameInput>> {
        let mut out = Vec::new();
        for chunk in self.parrondo.chunks(3) {
            let m: usize = chunk[0]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("period {:?} is not a positive integer", chunk[0])))?;
            let spec = ParrondoSpec::new(m, parse_probability(&chunk[1])?, parse_probability(&chunk[2])?)?;
            out.push(GameInput::Parrondo(spec));
        }
        for path in &self.game {
            out.push(load_game(path)?);
        }
        if let Some(p) = &self.p {
            let p = parse_list(p)?;
            let q = match &self.q {
                Some(q) => parse_list(q)?,
                None => p.iter().map(|x| 1.0 - x).collect(),
            };
            let m = self.m.unwrap_or(p.len());
            out.push(GameInput::Walk(WalkSpec::new(m, p, q)?));
        } else if self.q.is_some() || self.m.is_some() {
            return Err(Error::InvalidSpec("--m and --q need --p".into()));
        }
        Ok(out)
    }

    pub fn one(&self) -> Result<GameInput> {
        let mut games = self.games()?;
        if games.len() != 1 {
            return Err(Error::InvalidSpec(format!(
                "expected exactly one game, got {}",
                games.len()
            )));
        }
        Ok(games.remove(0))
    }

    pub fn two(&self) -> Result<(GameInput, GameInput)> {
        let mut games = self.games()?;
        if games.len() != 2 {
            return Err(Error::InvalidSpec(format!(
                "expected exactly two games, got {}",
                games.len()
            )));
        }
        let b = games.remove(1);
        Ok((games.remove(0), b))
    }
}

pub fn load_game(path: &Path) -> Result<GameInput> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    game_from_value(value)
}

pub fn game_from_value(value: Value) -> Result<GameInput> {
    let bad = |e: serde_json::Error| Error::InvalidSpec(e.to_string());
    match value {
        Value::Object(mut obj) => {
            if let Some(inner) = obj.remove("game") {
                return game_from_value(inner);
            }
            let v = Value::Object(obj);
            if v.get("pp").is_some() {
                Ok(GameInput::Parrondo(serde_json::from_value(v).map_err(bad)?))
            } else {
                Ok(GameInput::Walk(serde_json::from_value(v).map_err(bad)?))
            }
        }
        _ => Err(Error::InvalidSpec("game JSON must be an object".into())),
    }
}
