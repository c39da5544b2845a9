// Small DOM-building helpers bound to a document, so the app never touches
// globals and can be mounted into any window (browser or test).

export type Child = Node | string;

export interface Dom {
  el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs?: Record<string, string>,
    ...children: Child[]
  ): HTMLElementTagNameMap[K];
  clear(node: Element): void;
}

export function makeDom(doc: Document): Dom {
  function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    ...children: Child[]
  ): HTMLElementTagNameMap[K] {
    const node = doc.createElement(tag);
    for (const [name, value] of Object.entries(attrs)) {
      node.setAttribute(name, value);
    }
    for (const child of children) {
      node.append(child);
    }
    return node;
  }

  function clear(node: Element): void {
    while (node.firstChild) {
      node.removeChild(node.firstChild);
    }
  }

  return { el, clear };
}
