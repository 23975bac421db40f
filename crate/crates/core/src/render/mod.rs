//! Natural-language rendering: template files, state/fact/action text, and
//! the inverse parser that resolves action phrasings back to ground actions.

pub mod template;
pub mod text;

use std::path::Path;

use crate::ground::GroundTask;

pub use template::{load_template_file, JoinStyle, TemplateError, TemplateSet};
pub use text::{
    askable_preds, comma_and, parse_action_name, render_action, render_action_variant,
    render_action_with_names, render_context, render_corrupt_action, render_fact, render_facts,
    render_goal, render_intro, render_plan, render_state, validate_rendering,
};

/// Loads `<dir>/<domain>.tpl` and runs both structural and rendering checks
/// against the task.
pub fn load_templates(dir: &Path, task: &GroundTask) -> Result<TemplateSet, TemplateError> {
    let tpl = load_template_file(dir, &task.domain_name)?;
    tpl.validate(task)?;
    validate_rendering(task, &tpl)?;
    Ok(tpl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_task, GroundCfg};
    use crate::pddl::{parse_domain, parse_problem};
    use crate::transition::State;

    fn data_dir(sub: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(sub)
    }

    fn task(domain: &str, problem: &str) -> GroundTask {
        let dir = data_dir("domains").join(domain);
        let d = parse_domain(&std::fs::read_to_string(dir.join("domain.pddl")).unwrap()).unwrap();
        let p =
            parse_problem(&std::fs::read_to_string(dir.join(problem)).unwrap(), &d).unwrap();
        ground_task(&d, &p, &GroundCfg::default()).unwrap()
    }

    fn templates(task: &GroundTask) -> TemplateSet {
        load_templates(&data_dir("templates"), task).unwrap()
    }

    #[test]
    fn ferry_context_matches_known_text() {
        let t = task("ferry", "p01.pddl");
        let tpl = templates(&t);
        let ctx = render_context(&t, &tpl, &State::initial(&t), false);
        assert_eq!(
            ctx,
            "This is a ferry domain, where the task is to transport cars from their start to \
             their goal locations, using a ferry. Each location is accessible by ferry from each \
             other location. The cars can be debarked or boarded, and the ferry can carry only \
             one car at a time.  There are 2 locations and 2 cars, numbered consecutively.  \
             Currently, the ferry is at l0, with the car c1 on board. The cars are at locations \
             as follows: c0 is at l0."
        );
    }

    #[test]
    fn ferry_p02_state_and_goal() {
        let t = task("ferry", "p02.pddl");
        let tpl = templates(&t);
        let ctx = render_context(&t, &tpl, &State::initial(&t), true);
        assert!(ctx.contains("There are 5 locations and 3 cars, numbered consecutively."));
        assert!(ctx.contains(
            "Currently, the ferry is at l0 location and it is empty. The cars are at locations \
             as follows: c0 and c2 are at l4; c1 is at l0."
        ));
        assert!(ctx.ends_with(
            "The goal is to reach a state where the following facts hold: Car c1 is at location \
             l3, Car c0 is at location l3, and Car c2 is at location l3."
        ));
    }

    #[test]
    fn blocksworld_context_matches_known_text() {
        let t = task("blocksworld", "p01.pddl");
        let tpl = templates(&t);
        let ctx = render_context(&t, &tpl, &State::initial(&t), true);
        assert!(ctx.contains("There are 3 blocks."));
        assert!(ctx.contains(
            "Currently, the robotic arm is empty. The following block(s) is on the table: \
             block_1. The following block(s) are stacked on top of another block: block_2 is on \
             block_1 and block_3 is on block_2."
        ));
        assert!(ctx.ends_with(
            "The goal is to reach a state where the following facts hold: The block block_3 is \
             currently situated above the block block_1."
        ));
    }

    #[test]
    fn grippers_context_matches_known_text() {
        let t = task("gripper", "p01.pddl");
        let tpl = templates(&t);
        let ctx = render_context(&t, &tpl, &State::initial(&t), true);
        assert!(ctx.contains("There are 1 robot, 5 rooms, and 4 balls, numbered consecutively."));
        assert!(ctx.contains(
            "Currently, the robot robot1 is at room4 and both grippers are free. Additionally, \
             ball1 is at room2, ball2 and ball4 are at room1, ball3 is at room5."
        ));
        assert!(ctx.ends_with(
            "The goal is to reach a state where the following facts hold: Ball ball3 is at \
             room4 location."
        ));
    }

    #[test]
    fn swap_context_matches_known_text() {
        let t = task("swap", "p01.pddl");
        let tpl = templates(&t);
        let ctx = render_context(&t, &tpl, &State::initial(&t), true);
        assert!(ctx.contains("There are 4 agents: alice, carol, dave, and zoe."));
        assert!(ctx.contains("There are 4 items/roles: frisbee, guitar, necklace, and whale."));
        assert!(ctx.contains(
            "Currently, alice is assigned necklace, carol is assigned frisbee, dave is \
             assigned whale, and zoe is assigned guitar."
        ));
        assert!(ctx.ends_with(
            "The goal is to reach a state where the following facts hold: alice is assigned \
             guitar and zoe is assigned necklace."
        ));
    }

    #[test]
    fn ferry_fact_and_action_phrasings() {
        let t = task("ferry", "p01.pddl");
        let tpl = templates(&t);
        let fact = |s: &str| render_fact(&t, &tpl, t.atom_from_text(s).unwrap());
        assert_eq!(fact("(at-ferry l1)"), "The ferry is at l1 location");
        assert_eq!(fact("(at c0 l1)"), "Car c0 is at location l1");
        assert_eq!(fact("(on c1)"), "Car c1 is on board the ferry");
        assert_eq!(fact("(empty-ferry)"), "The ferry is empty");
        assert_eq!(fact("(car c0)"), "c0 is a car");

        let sail = t.action_from_text("(sail l1 l0)").unwrap();
        assert_eq!(
            render_action(&t, &tpl, sail),
            "travel by sea from location l1 to location l0"
        );
        assert_eq!(
            render_action_variant(&t, &tpl, sail, 1),
            "sail from location l1 to location l0"
        );
        let board = t.action_from_text("(board c0 l0)").unwrap();
        assert_eq!(
            render_action(&t, &tpl, board),
            "board the car c0 at location l0 on to the ferry"
        );
    }

    #[test]
    fn action_round_trips_all_domains() {
        for (domain, problem) in [
            ("ferry", "p02.pddl"),
            ("blocksworld", "p02.pddl"),
            ("gripper", "p01.pddl"),
            ("swap", "p01.pddl"),
        ] {
            let t = task(domain, problem);
            let tpl = templates(&t);
            for a in &t.actions {
                let schema = &t.schema_names[a.schema];
                for v in 0..tpl.phrasing_count(schema) {
                    let text = render_action_variant(&t, &tpl, a.id, v);
                    assert_eq!(
                        parse_action_name(&t, &tpl, &text),
                        Some(a.id),
                        "{domain}: '{text}'"
                    );
                }
            }
        }
    }

    #[test]
    fn corrupt_actions_never_parse() {
        for (domain, problem) in [
            ("ferry", "p02.pddl"),
            ("blocksworld", "p02.pddl"),
            ("gripper", "p01.pddl"),
            ("swap", "p01.pddl"),
        ] {
            let t = task(domain, problem);
            let tpl = templates(&t);
            for a in &t.actions {
                let schema = &t.schema_names[a.schema];
                for v in 0..tpl.corrupt_count(schema) {
                    let text = render_corrupt_action(&t, &tpl, a.id, v);
                    assert_eq!(parse_action_name(&t, &tpl, &text), None, "{domain}: '{text}'");
                }
            }
        }
    }

    #[test]
    fn parse_tolerates_case_and_punctuation() {
        let t = task("ferry", "p01.pddl");
        let tpl = templates(&t);
        let sail = t.action_from_text("(sail l0 l1)").unwrap();
        for text in [
            "Travel by sea from location l0 to location l1.",
            "  travel by sea from  location l0 to location l1 ?",
            "TRAVEL BY SEA FROM LOCATION L0 TO LOCATION L1",
        ] {
            assert_eq!(parse_action_name(&t, &tpl, text), Some(sail), "{text:?}");
        }
        assert_eq!(parse_action_name(&t, &tpl, "fly from l0 to l1"), None);
        assert_eq!(
            parse_action_name(&t, &tpl, "travel by sea from location l9 to location l1"),
            None
        );
    }

    #[test]
    fn hidden_predicates_are_excluded_from_pools() {
        let t = task("ferry", "p01.pddl");
        let tpl = templates(&t);
        assert!(tpl.is_hidden("not-eq"));
        let askable = askable_preds(&t, &tpl);
        assert!(!askable.contains(&t.pred_id("not-eq").unwrap()));
        assert!(askable.contains(&t.pred_id("at").unwrap()));
    }

    #[test]
    fn goal_keeps_problem_source_order() {
        let t = task("ferry", "p02.pddl");
        let tpl = templates(&t);
        let goal = render_goal(&t, &tpl);
        let c1 = goal.find("Car c1").unwrap();
        let c0 = goal.find("Car c0").unwrap();
        let c2 = goal.find("Car c2").unwrap();
        assert!(c1 < c0 && c0 < c2);
    }

    #[test]
    fn empty_dynamic_state_renders_intro_only() {
        let t = task("ferry", "p01.pddl");
        let tpl = templates(&t);
        let empty = State::from_bits(crate::bitset::BitSet::new(t.num_atoms()));
        assert_eq!(render_state(&t, &tpl, &empty), "");
        let ctx = render_context(&t, &tpl, &empty, false);
        assert!(!ctx.contains("Currently"));
        assert!(ctx.ends_with("numbered consecutively."));
    }

    #[test]
    fn missing_template_file_is_io_error() {
        let t = task("ferry", "p01.pddl");
        let err = load_templates(Path::new("/nonexistent"), &t).unwrap_err();
        assert!(matches!(err, TemplateError::Io { .. }));
    }

    #[test]
    fn bad_template_is_rejected() {
        let text = "[predicate nope]\nfact: x {0}\n";
        let tpl = TemplateSet::parse_str(text).unwrap();
        let t = task("ferry", "p01.pddl");
        let err = tpl.validate(&t).unwrap_err();
        assert!(err.to_string().contains("unknown predicate"));

        assert!(TemplateSet::parse_str("stray line\n").is_err());
        assert!(TemplateSet::parse_str("[group at by x]\nitem: {members} at {key}\n").is_err());
        assert!(TemplateSet::parse_str("[compose c]\nwhen : text\n").is_err());
    }

    #[test]
    fn validate_catches_uncovered_dynamic_predicate() {
        // A template that names every predicate but gives `on` no state rule
        // and no group must be rejected for ferry.
        let t = task("ferry", "p01.pddl");
        let text = "\
[domain_intro]
Intro.
[predicate at-ferry]
fact: The ferry is at {0} location
state: the ferry is at {0}
[predicate at]
fact: Car {0} is at location {1}
state: the car {0} is at {1}
[predicate on]
fact: Car {0} is on board the ferry
[predicate empty-ferry]
fact: The ferry is empty
state: the ferry is empty
[predicate car]
fact: {0} is a car
[predicate location]
fact: {0} is a location
[predicate not-eq]
hidden: true
[action sail]
sail from {0} to {1}
[corrupt_action sail]
drive from {0} to {1}
[action board]
board {0} at {1}
[corrupt_action board]
unboard {0} at {1}
[action debark]
debark {0} at {1}
[corrupt_action debark]
disembark {0} at {1}
";
        let tpl = TemplateSet::parse_str(text).unwrap();
        let err = tpl.validate(&t).unwrap_err();
        assert!(err.to_string().contains("'on'"), "{err}");
    }
}
