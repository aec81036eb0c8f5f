/* socket buffer helpers (fixture excerpt)
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 *
 *
 *
 * filler
 *
 */
static inline unsigned int skb_headlen(const struct sk_buff *skb)
{
	return skb->len - skb->data_len;
}
/*
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 *
 */
static inline int pskb_may_pull(struct sk_buff *skb, unsigned int len)
{
	if (likely(len <= skb_headlen(skb)))
		return 1;
	if (unlikely(len > skb->len))
		return 0;
	return __pskb_pull_tail(skb, len - skb_headlen(skb)) != NULL;
}
