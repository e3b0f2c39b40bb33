use buda::automaton::membership::{membership, membership_eps, MemberOptions};

fn main() {
    let q = std::env::args().nth(1).unwrap();
    let tree_src = std::env::args().nth(2).unwrap();
    let eta = buda::xpath::parser::parse_node_expr(&q).unwrap();
    let labels = buda::xpath::sat::sat_alphabet(&eta);
    let opts = Default::default();
    let tree = buda::tree::DataTree::parse(&tree_src).unwrap();
    println!("eval: {}", !buda::xpath::eval::eval(&tree, &eta).is_empty());
    let tr = buda::xpath::translate::translate(&eta, &labels, &opts).unwrap();
    println!("eps-member: {:?}", membership_eps(&tr.aut, &tree, &MemberOptions::default()));
    let elim = buda::automaton::epsilon::eliminate_epsilon(&tr.aut, &opts).unwrap();
    println!("elim-member: {:?} (lossy={})", membership(&elim.aut, &tree, &MemberOptions::default()).map(|r| r.accepted), elim.lossy_leaf_closure);
    let norm = buda::automaton::normalize::normalize(&elim.aut, &opts).unwrap();
    println!("norm-member: {:?}", membership(&norm, &tree, &MemberOptions::default()).map(|r| r.accepted));
}
